import numpy as np
import pytest

from invograph import matrix as M
from invograph.errors import BranchUnavailable, NotLowerTriangular, WitnessFailed
from invograph.gf import make_field
from invograph.graph import distance
from invograph.involutions import ClassSpec, canonical_t, class_of, enumerate_class, is_block_lower
from invograph.witnesses import (
    delta1_commuting,
    far_involution,
    far_involution_char2,
    far_involution_odd,
    four_step_path_to_transpose,
    path_lower_triangular,
    shift_minus_two,
    transpose_chain,
    transpose_distance_report,
    transpose_lower_bound,
    two_step_path,
    verify_far_involution,
)


def spec_of(n, k, p, e=1):
    return ClassSpec(n, k, make_field(p, e))


ODD_CASES = [(3, 1, 3), (3, 1, 5), (3, 1, 7), (3, 2, 3), (4, 2, 3), (5, 2, 3), (6, 2, 3), (5, 3, 3), (4, 2, 5), (3, 1, 9)]
CHAR2_CASES = [(3, 1, 2, 1), (4, 2, 2, 1), (5, 2, 2, 1), (7, 2, 2, 1), (4, 2, 2, 2), (6, 2, 2, 1), (3, 1, 4, 1)]


@pytest.mark.parametrize("n,k,p", ODD_CASES)
def test_far_involution_odd(n, k, p):
    F = make_field(*((3, 2) if p == 9 else (p, 1)))
    spec = ClassSpec(n, k, F)
    x = far_involution_odd(n, k, F)
    assert class_of(x, F) == k
    report = verify_far_involution(spec, x, case="odd")
    assert report.bound == ">= 3"
    assert delta1_commuting(spec, x) == 0


@pytest.mark.parametrize("n,k,p,e", CHAR2_CASES)
def test_far_involution_char2(n, k, p, e):
    spec = spec_of(n, k, 2, 2) if p == 4 else spec_of(n, k, p, e)
    x = far_involution_char2(n, k, spec.field)
    assert verify_far_involution(spec, x).details["commuting"] == 0


@pytest.mark.parametrize("n,k,p", [(4, 2, 3), (3, 1, 3), (4, 2, 2), (3, 1, 2)])
def test_far_involution_distance_is_exactly_three(n, k, p):
    spec = spec_of(n, k, p)
    d, cert = distance(canonical_t(spec), far_involution(spec), spec)
    assert d == 3 and cert.validate()


def test_verify_rejects_near_members():
    spec = spec_of(4, 2, 3)
    with pytest.raises(WitnessFailed):
        verify_far_involution(spec, canonical_t(spec))
    x = np.diag([1, 2, 1, 2])
    with pytest.raises(WitnessFailed):
        verify_far_involution(spec, x)


def test_shift_minus_two_centralizes_only_minus_identity():
    F = make_field(5)
    a = shift_minus_two(F, 3)
    from invograph.involutions import involutions_with_identity

    invs = [x for group in involutions_with_identity(F, 3)[1:] for x in group]
    commuting = [x for x in invs if np.array_equal(M.matmul(F, a, x), M.matmul(F, x, a))]
    assert len(commuting) == 1 and np.array_equal(commuting[0], M.neg(F, M.identity(3)))


def test_branch_errors():
    with pytest.raises(BranchUnavailable):
        far_involution_odd(4, 2, make_field(2))
    with pytest.raises(BranchUnavailable):
        transpose_lower_bound(2, make_field(2))
    with pytest.raises(BranchUnavailable):
        far_involution_char2(6, 3, make_field(2))
    with pytest.raises(BranchUnavailable):
        two_step_path(canonical_t(spec_of(4, 2, 3)), spec_of(4, 2, 3))


@pytest.mark.parametrize("k", [3, 5, 7, 9, 11])
def test_transpose_chain_structure(k):
    F = make_field(2)
    spec = ClassSpec(2 * k, k, F)
    mid, z = transpose_chain(k, F)
    t = canonical_t(spec)
    assert class_of(mid, F) == k and class_of(z, F) == k
    assert is_block_lower(spec, z)
    cert = four_step_path_to_transpose(k, F)
    assert cert.length == 4 and cert.validate(t, t.T)


def test_transpose_distance_is_four():
    F = make_field(2)
    report = transpose_distance_report(3, F)
    assert report.bound == "= 4"
    assert report.details["commuting"] == 0
    t = canonical_t(ClassSpec(6, 3, F))
    assert report.certificate.validate(t, t.T)


@pytest.mark.parametrize("n,k,p,e", [(4, 2, 3, 1), (4, 2, 2, 1), (4, 1, 3, 1), (4, 1, 2, 1), (4, 3, 3, 1), (4, 2, 2, 2), (5, 2, 2, 1), (6, 3, 2, 1)])
def test_lower_triangular_paths_sound(n, k, p, e):
    spec = spec_of(n, k, p, e)
    F = spec.field
    t = canonical_t(spec)
    orbit = enumerate_class(spec)
    lower = [x for x in orbit.members if is_block_lower(spec, x)]
    assert lower
    rng = np.random.default_rng(0)
    if len(lower) > 400:
        lower = [lower[i] for i in rng.choice(len(lower), 400, replace=False)]
    limit = 3 if (F.char != 2 and n == 2 * k and k % 2) else 2
    for i, x in enumerate(lower):
        cert = path_lower_triangular(x, spec)
        assert cert.validate(t, x)
        assert cert.length <= limit
        if i < 20:
            d, _ = distance(t, x, spec, mode="bounded")
            assert cert.length >= d


def test_lower_triangular_rejects_upper():
    spec = spec_of(4, 2, 3)
    x = np.asarray(M.conjugate(spec.field, M.elementary(spec.field, 4, 0, 3, 1), canonical_t(spec)))
    with pytest.raises(NotLowerTriangular):
        path_lower_triangular(x, spec)


@pytest.mark.parametrize("n,k,p", [(4, 1, 3), (4, 3, 3), (5, 1, 3), (4, 1, 5)])
def test_two_step_paths_cover_class(n, k, p):
    spec = spec_of(n, k, p)
    t = canonical_t(spec)
    orbit = enumerate_class(spec)
    X = orbit.members
    rng = np.random.default_rng(1)
    idx = range(len(X)) if len(X) <= 2000 else rng.choice(len(X), 800, replace=False)
    for i in idx:
        cert = two_step_path(X[i], spec)
        assert cert.length <= 2 and cert.validate(t, X[i])
