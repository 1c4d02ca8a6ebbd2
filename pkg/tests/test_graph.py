import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from invograph import matrix as M
from invograph.errors import BoundExceeded, ClassTooLarge, NotInClass
from invograph.gf import make_field
from invograph.graph import (
    adjacent,
    all_involutions_census,
    bfs_census,
    commuting_mask,
    diameter,
    distance,
    involution_classes,
)
from invograph.involutions import ClassSpec, canonical_t, enumerate_class, meet_dim


def spec_of(n, k, p, e=1):
    return ClassSpec(n, k, make_field(p, e))


def all_pairs(spec):
    """Oracle: dense commuting matrix plus scipy shortest paths."""
    F = spec.field
    X = enumerate_class(spec).members
    adj = commuting_mask(F, X, X)
    np.fill_diagonal(adj, False)
    return X, shortest_path(csr_matrix(adj), unweighted=True, directed=False)


@pytest.mark.parametrize(
    "n,k,p,e,expected",
    [
        (3, 1, 2, 1, {0: 1, 1: 4, 2: 8, 3: 8}),
        (4, 1, 2, 1, {0: 1, 1: 24, 2: 80}),
        (4, 2, 2, 1, {0: 1, 1: 17, 2: 112, 3: 80}),
        (3, 1, 3, 1, {0: 1, 1: 12, 2: 88, 3: 16}),
        (3, 1, 5, 1, {0: 1, 1: 30, 2: 648, 3: 96}),
        (4, 2, 2, 2, {0: 1, 1: 419, 2: 18528, 3: 45312}),
    ],
)
def test_known_censuses(n, k, p, e, expected):
    c = bfs_census(spec_of(n, k, p, e))
    assert c.counts == expected
    assert c.diameter == max(expected) and c.connected


@pytest.mark.parametrize("n,k,p", [(4, 1, 2), (4, 2, 2), (3, 1, 3), (4, 1, 3), (3, 2, 3)])
def test_methods_agree(n, k, p):
    spec = spec_of(n, k, p)
    ref = bfs_census(spec, method="pairwise", cells=True)
    for method in ("neighbors", "orbit"):
        c = bfs_census(spec, method=method, cells=True)
        assert c.counts == ref.counts and c.cells == ref.cells


@pytest.mark.parametrize("n,k,p", [(4, 2, 2), (3, 1, 3), (3, 1, 2), (4, 1, 2)])
def test_census_matches_scipy_oracle(n, k, p):
    spec = spec_of(n, k, p)
    X, D = all_pairs(spec)
    root = int(np.flatnonzero(np.all(X == canonical_t(spec), axis=(1, 2)))[0])
    vals, cnt = np.unique(D[root], return_counts=True)
    assert bfs_census(spec).counts == {int(v): int(c) for v, c in zip(vals, cnt)}


def test_cells_use_meet_dimension():
    spec = spec_of(4, 2, 3)
    c = bfs_census(spec, cells=True)
    assert sum(c.cells.values()) == c.total
    for d in c.counts:
        assert sum(v for (dd, _), v in c.cells.items() if dd == d) == c.counts[d]
    assert c.cells[(0, 2)] == 1


def test_census_invariant_under_base_conjugation():
    spec = spec_of(4, 2, 2)
    F = spec.field
    ref = bfs_census(spec, cells=False)
    orbit = enumerate_class(spec)
    rng = np.random.default_rng(11)
    for i in rng.choice(len(orbit), size=10, replace=False):
        c = bfs_census(spec, base=orbit.members[i], orbit=orbit, seed=int(i))
        assert c.counts == ref.counts


def test_census_independent_of_seed_and_workers():
    spec = spec_of(4, 2, 3)
    ref = bfs_census(spec, cells=True)
    for seed, workers in ((1, 1), (2, 4), (3, 2)):
        c = bfs_census(spec, cells=True, seed=seed, workers=workers)
        assert c.as_dict() | {"runtime_ms": 0} == ref.as_dict() | {"runtime_ms": 0}


@pytest.mark.parametrize("n,k", [(4, 1), (5, 1), (5, 2)])
def test_negation_isomorphism(n, k):
    F = make_field(3)
    a = bfs_census(ClassSpec(n, k, F))
    b = bfs_census(ClassSpec(n, n - k, F))
    assert a.counts == b.counts


def test_distance_symmetry_and_triangle():
    spec = spec_of(4, 2, 2)
    F = spec.field
    X, D = all_pairs(spec)
    orbit = enumerate_class(spec)
    rng = np.random.default_rng(12)
    trip = rng.choice(len(X), size=(15, 3))
    for i, j, l in trip:
        dij, cert = distance(X[i], X[j], spec, orbit=orbit)
        dji, _ = distance(X[j], X[i], spec, orbit=orbit)
        assert dij == dji == D[i, j]
        assert cert.validate(X[i], X[j]) and cert.length == dij
        assert D[i, l] <= D[i, j] + D[j, l]


def test_bounded_distance_agrees_with_exact():
    spec = spec_of(4, 2, 3)
    X = enumerate_class(spec).members
    t = canonical_t(spec)
    rng = np.random.default_rng(13)
    for i in rng.choice(len(X), size=40, replace=False):
        d_exact, _ = distance(t, X[i], spec)
        d_bound, cert = distance(t, X[i], spec, mode="bounded")
        assert d_bound == d_exact and cert.validate(t, X[i])


def test_bounded_distance_reports_far_pairs():
    F = make_field(2)
    spec = ClassSpec(6, 3, F)
    t = canonical_t(spec)
    with pytest.raises(BoundExceeded):
        distance(t, t.T.copy(), spec, mode="bounded")


def test_distance_rejects_non_members():
    spec = spec_of(4, 2, 3)
    with pytest.raises(NotInClass):
        distance(canonical_t(spec), M.identity(4), spec)


def test_cap_is_enforced():
    with pytest.raises(ClassTooLarge):
        bfs_census(spec_of(4, 2, 3), cap=1000)


def test_adjacency():
    F = make_field(3)
    t = canonical_t(ClassSpec(3, 1, F))
    assert not adjacent(t, t, F)
    x = np.diag([2, 1, 1])
    assert adjacent(t, x, F)


@pytest.mark.parametrize("n,k,p,d", [(4, 2, 2, 3), (6, 3, 2, 4), (4, 1, 3, 2)])
def test_diameter(n, k, p, d):
    assert diameter(spec_of(n, k, p)) == d


def test_all_involutions():
    F2 = make_field(2)
    c = all_involutions_census(4, F2)
    assert c.counts == {0: 1, 1: 42, 2: 272}
    assert c.diameter == 3
    assert all_involutions_census(3, F2).diameter == 3
    assert involution_classes(4, make_field(3)) == [1, 2, 3]
    assert involution_classes(5, F2) == [1, 2]


def test_vertex_distances_match_oracle():
    from invograph.graph import vertex_distances

    spec = spec_of(4, 2, 2)
    X, D = all_pairs(spec)
    root = int(np.flatnonzero(np.all(X == canonical_t(spec), axis=(1, 2)))[0])
    assert np.array_equal(vertex_distances(spec), D[root].astype(np.int64))
