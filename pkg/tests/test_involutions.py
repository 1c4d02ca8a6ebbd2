import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invograph import matrix as M
from invograph.errors import InvalidClass, InvalidM, NotInClass
from invograph.gf import make_field
from invograph.involutions import (
    ClassSpec,
    canonical_t,
    class_of,
    class_size,
    decompose_general,
    delta1,
    delta1_by_filter,
    delta1_shape_check,
    enumerate_class,
    make_tm,
    make_wm,
    meet_dim,
    batch_meet_dim,
    random_centralizer_elements,
    tm_identity_holds,
    transport,
)

SMALL = [(3, 1, 2, 1), (4, 1, 2, 1), (4, 2, 2, 1), (4, 1, 3, 1), (4, 2, 3, 1), (4, 3, 3, 1), (3, 1, 5, 1), (4, 2, 2, 2), (5, 2, 2, 1)]


def spec_of(n, k, p, e):
    return ClassSpec(n, k, make_field(p, e))


@pytest.mark.parametrize("n,k,p,e", SMALL)
def test_enumeration_matches_class_size(n, k, p, e):
    spec = spec_of(n, k, p, e)
    orbit = enumerate_class(spec)
    assert len(orbit) == class_size(spec)
    assert np.all(np.diff(orbit.codes.astype(np.float64)) > 0)
    F = spec.field
    t = canonical_t(spec)
    rng = np.random.default_rng(0)
    for i in rng.choice(len(orbit), size=min(50, len(orbit)), replace=False):
        g = orbit.conjugator(i)
        assert np.array_equal(M.conjugate(F, g, t), orbit.members[i])
        assert class_of(orbit.members[i], F) == k


def test_known_class_sizes():
    assert class_size(spec_of(4, 1, 2, 1)) == 105
    assert class_size(spec_of(4, 2, 2, 1)) == 210
    assert class_size(spec_of(4, 2, 3, 1)) == 10530
    assert class_size(spec_of(6, 3, 2, 1)) == 1 + 503 + 52864 + 180480 + 512


@pytest.mark.parametrize("n,k,p,e", SMALL)
def test_delta1_shapes_equal_filter(n, k, p, e):
    spec = spec_of(n, k, p, e)
    by_shape = delta1(spec)
    by_filter = delta1_by_filter(spec)
    F = spec.field
    assert np.array_equal(np.sort(M.encode(F, by_shape)), np.sort(M.encode(F, by_filter)))
    assert all(delta1_shape_check(x, spec) for x in by_shape)


def test_delta1_shape_check_rejects():
    spec = spec_of(4, 2, 3, 1)
    assert not delta1_shape_check(canonical_t(spec), spec)
    orbit = enumerate_class(spec)
    t = canonical_t(spec)
    F = spec.field
    for x in orbit.members[:200]:
        commutes = np.array_equal(M.matmul(F, x, t), M.matmul(F, t, x)) and not np.array_equal(x, t)
        assert delta1_shape_check(x, spec) == commutes


@pytest.mark.parametrize("n,k,p,e", SMALL + [(6, 3, 2, 1), (7, 3, 3, 1), (8, 3, 2, 1), (6, 4, 3, 1)])
def test_tm_identities(n, k, p, e):
    spec = spec_of(n, k, p, e)
    F = spec.field
    for m in range(max(2 * k - n, 0), k + 1):
        tm = make_tm(spec, m)
        assert class_of(tm, F) == k
        assert meet_dim(spec, tm) == m
        assert tm_identity_holds(spec, m)
        w = make_wm(spec, m)
        assert np.array_equal(M.matmul(F, w, w), M.identity(n))


def test_invalid_parameters():
    with pytest.raises(InvalidClass):
        spec_of(4, 3, 2, 1)
    with pytest.raises(InvalidClass):
        spec_of(4, 4, 3, 1)
    with pytest.raises(InvalidM):
        make_tm(spec_of(4, 3, 3, 1), 1)
    with pytest.raises(NotInClass):
        transport(spec_of(4, 2, 3, 1), M.identity(4))


@pytest.mark.parametrize("n,k,p,e", [(4, 2, 3, 1), (4, 2, 2, 1), (5, 2, 2, 1), (4, 1, 3, 1), (5, 2, 3, 1), (4, 2, 2, 2), (6, 3, 2, 1)])
def test_transport_roundtrip_random_members(n, k, p, e):
    spec = spec_of(n, k, p, e)
    F = spec.field
    orbit = enumerate_class(spec)
    rng = np.random.default_rng(7)
    idx = rng.choice(len(orbit), size=100, replace=False)
    U = M.span(F, M.identity(n)[:, n - k :])
    ms = batch_meet_dim(spec, orbit.members[idx])
    for i, m_fast in zip(idx, ms):
        x = orbit.members[i]
        g, m = transport(spec, x)
        assert m == m_fast == meet_dim(spec, x)
        assert not g[: n - k, n - k :].any()  # g stabilizes [V, t]
        Wm = M.image_basis(F, M.sub(F, make_tm(spec, m), M.identity(n)))
        moved = M.span(F, M.matmul(F, g, Wm.vectors))
        assert moved == M.image_basis(F, M.sub(F, x, M.identity(n)))
        assert M.span(F, M.matmul(F, g, U.vectors)) == U


@pytest.mark.parametrize("n,k,p,e", [(4, 2, 3, 1), (4, 2, 2, 1), (5, 2, 2, 1), (5, 2, 3, 1), (6, 3, 2, 1)])
def test_decompose_general(n, k, p, e):
    spec = spec_of(n, k, p, e)
    F = spec.field
    orbit = enumerate_class(spec)
    rng = np.random.default_rng(8)
    for i in rng.choice(len(orbit), size=60, replace=False):
        x = orbit.members[i]
        d = decompose_general(spec, x)
        assert np.array_equal(M.conjugate(F, d.h, d.y), x)
        assert d.m == meet_dim(spec, x)


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_random_centralizer_elements_commute(seed):
    spec = spec_of(5, 2, 3, 1)
    F = spec.field
    t = canonical_t(spec)
    for g in random_centralizer_elements(F, t, 2, seed=seed):
        assert M.is_invertible(F, g)
        assert np.array_equal(M.matmul(F, g, t), M.matmul(F, t, g))
