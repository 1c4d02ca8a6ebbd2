"""Commuting involution graphs: adjacency, distance censuses, diameters, paths.

The class X_k is a single conjugacy class, so conjugation by GL_n acts on the
graph by automorphisms and transitively on vertices. Two consequences are
used throughout:

* the diameter is the eccentricity of the base point t;
* distance layers around t are unions of orbits of any subgroup H of the
  centralizer C_G(t), so breadth-first search can run on H-orbits instead of
  individual vertices. Each orbit is expanded through one representative
  r = g t g^-1, whose neighbours are g Delta_1(t) g^-1.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import matrix as M
from .errors import BoundExceeded, ClassTooLarge, Disconnected, DimensionMismatch, NotInClass
from .gf import Field
from .involutions import (
    DEFAULT_CLASS_CAP,
    ClassSpec,
    Orbit,
    canonical_t,
    class_of,
    class_size,
    commutator_space,
    conjugation_orbit,
    delta1,
    enumerate_class,
    random_centralizer_elements,
)

WORKERS_ENV = "INVOGRAPH_WORKERS"
UNREACHED = -1
_CHUNK = 1 << 15


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class AllInvolutions:
    """Marker for the vertex set of all non-central involutions of GL_n(field)."""

    n: int
    field: Field

    @property
    def label(self) -> str:
        return f"GL{self.n}(F{self.field.q}) all involutions"

    def as_dict(self) -> dict:
        F = self.field
        return {"n": self.n, "k": "all", "p": F.p, "e": F.e, "poly": list(F.poly), "q": F.q}


@dataclass
class DistanceCensus:
    spec: object
    counts: dict
    diameter: int
    connected: bool
    cells: dict | None = None
    runtime_ms: float = 0.0
    unreached: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.unreached

    def as_dict(self) -> dict:
        counts = {str(d): int(c) for d, c in sorted(self.counts.items())}
        if self.unreached:
            counts["inf"] = int(self.unreached)
        out = {
            "spec": self.spec.as_dict(),
            "counts": counts,
            "diameter": int(self.diameter),
            "connected": bool(self.connected),
        }
        if self.cells is not None:
            out["cells"] = [
                {"distance": int(d), "m": int(m), "count": int(c)} for (d, m), c in sorted(self.cells.items())
            ]
        out["runtime_ms"] = round(float(self.runtime_ms), 3)
        return out


@dataclass
class PathCertificate:
    """A chain of involutions in which consecutive members are distinct and commute."""

    field: Field
    members: list
    k: int | None = None
    note: str = dc_field(default="", compare=False)

    @property
    def length(self) -> int:
        return len(self.members) - 1

    @property
    def source(self) -> np.ndarray:
        return self.members[0]

    @property
    def target(self) -> np.ndarray:
        return self.members[-1]

    def problems(self) -> list:
        F = self.field
        out = []
        for i, x in enumerate(self.members):
            kx = class_of(x, F)
            if kx is None:
                out.append(f"member {i} is not an involution of the graph")
            elif self.k is not None and kx != self.k:
                out.append(f"member {i} lies in X_{kx}, expected X_{self.k}")
        for i in range(self.length):
            if not adjacent(self.members[i], self.members[i + 1], F):
                out.append(f"members {i} and {i + 1} are not adjacent")
        return out

    def validate(self, source=None, target=None) -> bool:
        if self.problems():
            return False
        if source is not None and not np.array_equal(self.source, source):
            return False
        if target is not None and not np.array_equal(self.target, target):
            return False
        return True


def adjacent(x, y, F: Field) -> bool:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise DimensionMismatch("vertices of different sizes")
    if np.array_equal(x, y):
        return False
    return bool(np.array_equal(M.matmul(F, x, y), M.matmul(F, y, x)))


def commuting_mask(F: Field, xs, ys) -> np.ndarray:
    """mask[i, j] = (xs[i] ys[j] == ys[j] xs[i]), computed in chunks."""
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    n = xs.shape[-1]
    out = np.zeros((xs.shape[0], ys.shape[0]), dtype=bool)
    if F.q == 2:
        cx = M.encode(F, xs)
        cy = M.encode(F, ys)
        step = max(1, (1 << 20) // max(1, cy.size))
        for s in range(0, cx.size, step):
            a = cx[s:s + step, None]
            out[s:s + step] = M.gf2_matmul_codes(a, cy[None], n) == M.gf2_matmul_codes(cy[None], a, n)
        return out
    step = max(1, (1 << 18) // max(1, ys.shape[0] * n * n))
    for s in range(0, xs.shape[0], step):
        a = xs[s:s + step, None]
        ab = M.matmul(F, a, ys[None])
        ba = M.matmul(F, ys[None], a)
        out[s:s + step] = (ab == ba).all(axis=(-1, -2))
    return out


def _conjugate_stack(F: Field, g, xs, g_inv=None) -> np.ndarray:
    g_inv = M.inverse(F, g) if g_inv is None else g_inv
    return M.matmul(F, M.matmul(F, g, xs), g_inv)


def _images(F: Field, orbit: Orbit, g, g_inv) -> np.ndarray:
    """Index of g x g^-1 for every member x of the orbit."""
    out = np.empty(len(orbit), dtype=np.int64)
    members = orbit.members
    for s in range(0, len(orbit), _CHUNK):
        out[s:s + _CHUNK] = orbit.index_of(M.encode(F, _conjugate_stack(F, g, members[s:s + _CHUNK], g_inv)))
    if (out < 0).any():
        raise NotInClass("conjugation left the vertex set")
    return out


def subgroup_orbits(F: Field, orbit: Orbit, gens) -> np.ndarray:
    """Label of the <gens>-orbit (under conjugation) of every member."""
    size = len(orbit)
    if not gens:
        return np.arange(size)
    rows, cols = [], []
    for g in gens:
        rows.append(np.arange(size))
        cols.append(_images(F, orbit, g, M.inverse(F, g)))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(size, size))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels


def _root(spec: ClassSpec, orbit: Orbit, base):
    """Index of the base vertex and a conjugator g with base = g t g^-1."""
    F = spec.field
    if base is None:
        base = canonical_t(spec)
    base = np.asarray(base, dtype=np.int64)
    idx = int(orbit.index_of(M.encode(F, base[None]))[0])
    if idx < 0:
        raise NotInClass("base point is not in the class")
    return idx, orbit.conjugator(idx)


def _census_from(spec, orbit, dist, weights, reps, base, cells, t0):
    F = spec.field
    reached = dist >= 0
    levels = np.unique(dist[reached])
    counts = {int(d): int(weights[dist == d].sum()) for d in levels}
    unreached = int(weights[~reached].sum())
    cell_map = None
    if cells:
        U = commutator_space(F, base)
        cell_map = {}
        for lab in np.flatnonzero(reached):
            x = orbit.members[reps[lab]]
            m = M.intersection_dim(F, U, commutator_space(F, x))
            key = (int(dist[lab]), int(m))
            cell_map[key] = cell_map.get(key, 0) + int(weights[lab])
    return DistanceCensus(
        spec=spec,
        counts=counts,
        diameter=int(levels.max()),
        connected=unreached == 0,
        cells=cell_map,
        runtime_ms=(time.perf_counter() - t0) * 1000,
        unreached=unreached,
    )


def bfs_census(
    spec: ClassSpec,
    method: str = "orbit",
    cells: bool = False,
    base=None,
    workers: int | None = None,
    cap: int = DEFAULT_CLASS_CAP,
    orbit: Orbit | None = None,
    seed: int = 0,
) -> DistanceCensus:
    """Distance census of X_k from ``base`` (default: the canonical involution).

    ``method`` selects the search:

    * ``"orbit"``: breadth-first search on orbits of a random subgroup of the
      base point's centralizer (the fast default);
    * ``"neighbors"``: plain breadth-first search over all vertices;
    * ``"pairwise"``: frontier x unvisited commuting tests, no neighbour lists.
    """
    t0 = time.perf_counter()
    F = spec.field
    if orbit is None:
        if class_size(spec) > cap:
            raise ClassTooLarge(f"{spec.label} has {class_size(spec)} members (cap {cap})")
        orbit = enumerate_class(spec, cap=cap)
    root, g0 = _root(spec, orbit, base)
    base_x = orbit.members[root]
    workers = default_workers() if workers is None else max(1, workers)

    if method == "pairwise":
        dist = _pairwise_bfs(F, orbit, root, workers)
        size = len(orbit)
        return _census_from(spec, orbit, dist, np.ones(size, dtype=np.int64), np.arange(size), base_x, cells, t0)

    d1 = delta1(spec)
    if method == "neighbors":
        labels = np.arange(len(orbit))
    elif method == "orbit":
        g0_inv = M.inverse(F, g0)
        t = canonical_t(spec)
        hs = [M.mul_chain(F, g0, h, g0_inv) for h in random_centralizer_elements(F, t, 4, seed=seed)]
        labels = subgroup_orbits(F, orbit, hs)
    else:
        raise ValueError(f"unknown method {method!r}")
    n_labels = int(labels.max()) + 1
    reps = np.full(n_labels, -1, dtype=np.int64)
    rev = np.arange(len(orbit))[::-1]
    reps[labels[rev]] = rev  # smallest index per label
    weights = np.bincount(labels, minlength=n_labels)
    dist = _quotient_bfs(F, orbit, labels, reps, d1, int(labels[root]), workers)
    return _census_from(spec, orbit, dist, weights, reps, base_x, cells, t0)


def _neighbour_labels(F, orbit, labels, reps, d1, lab) -> np.ndarray:
    g = orbit.conjugator(int(reps[lab]))
    nb = orbit.index_of(M.encode(F, _conjugate_stack(F, g, d1)))
    if (nb < 0).any():
        raise NotInClass("neighbour outside the class")
    return np.unique(labels[nb])


def _quotient_bfs(F, orbit, labels, reps, d1, start, workers) -> np.ndarray:
    dist = np.full(reps.size, UNREACHED, dtype=np.int64)
    dist[start] = 0
    frontier = np.array([start])
    level = 0
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while frontier.size:
            if pool is None:
                found = [_neighbour_labels(F, orbit, labels, reps, d1, lab) for lab in frontier]
            else:
                found = list(pool.map(lambda lab: _neighbour_labels(F, orbit, labels, reps, d1, lab), frontier))
            nxt = np.unique(np.concatenate(found)) if found else np.array([], dtype=np.int64)
            nxt = nxt[dist[nxt] == UNREACHED]
            level += 1
            dist[nxt] = level
            frontier = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return dist


def _pairwise_bfs(F, orbit, root, workers) -> np.ndarray:
    members = orbit.members
    dist = np.full(len(orbit), UNREACHED, dtype=np.int64)
    dist[root] = 0
    frontier = np.array([root])
    level = 0
    while frontier.size:
        unvisited = np.flatnonzero(dist == UNREACHED)
        if unvisited.size == 0:
            break
        parts = np.array_split(unvisited, workers)

        def hit(part):
            if part.size == 0:
                return part
            mask = commuting_mask(F, members[part], members[frontier])
            return part[mask.any(axis=1)]

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                found = list(pool.map(hit, parts))
        else:
            found = [hit(p) for p in parts]
        nxt = np.sort(np.concatenate(found))
        level += 1
        dist[nxt] = level
        frontier = nxt
    return dist


def vertex_distances(
    spec: ClassSpec,
    orbit: Orbit | None = None,
    cap: int = DEFAULT_CLASS_CAP,
    workers: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """d(t, x) for every class member, aligned with ``orbit.members`` (-1 when unreachable)."""
    F = spec.field
    if orbit is None:
        if class_size(spec) > cap:
            raise ClassTooLarge(f"{spec.label} has {class_size(spec)} members (cap {cap})")
        orbit = enumerate_class(spec, cap=cap)
    t = canonical_t(spec)
    root = int(orbit.index_of(M.encode(F, t[None]))[0])
    # distances from t are constant on orbits of subgroups of C_G(t)
    labels = subgroup_orbits(F, orbit, random_centralizer_elements(F, t, 4, seed=seed))
    n_labels = int(labels.max()) + 1
    reps = np.full(n_labels, -1, dtype=np.int64)
    rev = np.arange(len(orbit))[::-1]
    reps[labels[rev]] = rev
    workers = default_workers() if workers is None else max(1, workers)
    dist = _quotient_bfs(F, orbit, labels, reps, delta1(spec), int(labels[root]), workers)
    return dist[labels]


def diameter(spec: ClassSpec, **kwargs) -> int:
    census = bfs_census(spec, **kwargs)
    if not census.connected:
        raise Disconnected(f"{spec.label}: {census.unreached} vertices unreachable from t")
    return census.diameter


# --- distances between arbitrary vertices ----------------------------------


def _class_conjugator(spec: ClassSpec, x) -> np.ndarray:
    """g with x = g t g^-1."""
    F = spec.field
    canon = M.canonicalize_involution(F, x)
    if canon.k != spec.k or canon.degenerate:
        raise NotInClass("vertex is not in the class")
    return canon.P


def _descend(spec, orbit, labels, dist, d1, y) -> list:
    """Shortest path t -> y by repeatedly stepping to a neighbour one layer closer."""
    F = spec.field
    path = [y]
    cur = y
    while True:
        idx = int(orbit.index_of(M.encode(F, cur[None]))[0])
        d = dist[labels[idx]]
        if d == 0:
            break
        nbs = _conjugate_stack(F, orbit.conjugator(idx), d1)
        nb_idx = orbit.index_of(M.encode(F, nbs))
        closer = np.flatnonzero(dist[labels[nb_idx]] == d - 1)
        cur = nbs[closer[0]]
        path.append(cur)
    return path[::-1]


def distance(
    x,
    y,
    spec: ClassSpec,
    mode: str = "exact",
    seed: int = 0,
    cap: int = DEFAULT_CLASS_CAP,
    orbit: Orbit | None = None,
):
    """Graph distance between x and y with a path certificate.

    ``mode="exact"`` searches the whole class. ``mode="bounded"`` only uses
    Delta_1(x) and Delta_1(y) and decides d <= 3, raising BoundExceeded
    otherwise.
    """
    F = spec.field
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    for v in (x, y):
        if class_of(v, F) != spec.k:
            raise NotInClass("vertex is not in the class")
    if mode == "bounded":
        return _bounded_distance(spec, x, y, seed)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if orbit is None:
        if class_size(spec) > cap:
            raise ClassTooLarge(f"{spec.label} has {class_size(spec)} members (cap {cap})")
        orbit = enumerate_class(spec, cap=cap)
    gx = _class_conjugator(spec, x)
    gx_inv = M.inverse(F, gx)
    y0 = M.conjugate(F, gx_inv, y, gx)
    t = canonical_t(spec)
    hs = random_centralizer_elements(F, t, 4, seed=seed)
    labels = subgroup_orbits(F, orbit, hs)
    n_labels = int(labels.max()) + 1
    reps = np.full(n_labels, -1, dtype=np.int64)
    rev = np.arange(len(orbit))[::-1]
    reps[labels[rev]] = rev
    d1 = delta1(spec)
    root = int(labels[orbit.index_of(M.encode(F, t[None]))[0]])
    dist = _quotient_bfs(F, orbit, labels, reps, d1, root, 1)
    if dist[labels[orbit.index_of(M.encode(F, y0[None]))[0]]] < 0:
        raise Disconnected("target unreachable")
    path = [M.conjugate(F, gx, p, gx_inv) for p in _descend(spec, orbit, labels, dist, d1, y0)]
    return len(path) - 1, PathCertificate(F, path, spec.k)


def _bounded_distance(spec: ClassSpec, x, y, seed: int):
    F = spec.field
    if np.array_equal(x, y):
        return 0, PathCertificate(F, [x], spec.k)
    if adjacent(x, y, F):
        return 1, PathCertificate(F, [x, y], spec.k)
    d1 = delta1(spec)
    rng = np.random.default_rng(seed)
    nx = _conjugate_stack(F, _class_conjugator(spec, x), d1)[rng.permutation(len(d1))]
    ny = _conjugate_stack(F, _class_conjugator(spec, y), d1)[rng.permutation(len(d1))]
    common = np.flatnonzero(commuting_mask(F, nx, y[None])[:, 0])
    if common.size:
        return 2, PathCertificate(F, [x, nx[common[0]], y], spec.k)
    cx = M.encode(F, nx)
    cy = M.encode(F, ny)
    shared = np.intersect1d(cx, cy)
    if shared.size:  # impossible at distance > 2, kept as a guard
        z = nx[np.flatnonzero(cx == shared[0])[0]]
        return 2, PathCertificate(F, [x, z, y], spec.k)
    mask = commuting_mask(F, nx, ny)
    hits = np.argwhere(mask)
    if hits.size:
        i, j = hits[0]
        return 3, PathCertificate(F, [x, nx[i], ny[j], y], spec.k)
    raise BoundExceeded("no path of length <= 3 between the two vertices")


# --- all involutions -------------------------------------------------------


def involution_classes(n: int, F: Field) -> list:
    """Class parameters k making up the vertex set of the all-involutions graph."""
    if F.char == 2:
        return list(range(1, n // 2 + 1))
    return list(range(1, n))


def all_involutions_census(n: int, F: Field, cap: int = DEFAULT_CLASS_CAP) -> DistanceCensus:
    """Census from I(n,1) on the graph of all non-central involutions.

    The graph is not vertex-transitive across classes, so the reported
    diameter is the largest eccentricity of one representative per class.
    """
    t0 = time.perf_counter()
    ks = involution_classes(n, F)
    specs = [ClassSpec(n, k, F) for k in ks]
    if sum(class_size(s) for s in specs) > cap:
        raise ClassTooLarge(f"GL{n}(F{F.q}) has more than {cap} involutions")
    orbits = [enumerate_class(s, cap=cap) for s in specs]
    codes = np.concatenate([o.codes for o in orbits])
    conj = np.concatenate([o.conjugators for o in orbits])
    base_of = np.concatenate([np.full(len(o), i) for i, o in enumerate(orbits)])
    order = np.argsort(codes)
    codes, conj, base_of = codes[order], conj[order], base_of[order]
    members = M.decode(F, codes, n)
    # commuting neighbours of each class representative, indexed into the union
    nbr = []
    for s in specs:
        t = canonical_t(s)
        mask = commuting_mask(F, members, t[None])[:, 0]
        mask &= codes != M.encode(F, t[None])[0]
        nbr.append(members[mask])

    def neighbours(i):
        g = conj[i].astype(np.int64)
        nb = _conjugate_stack(F, g, nbr[base_of[i]])
        pos = np.searchsorted(codes, M.encode(F, nb))
        return pos

    def bfs(start):
        dist = np.full(codes.size, UNREACHED, dtype=np.int64)
        dist[start] = 0
        frontier = [start]
        level = 0
        while frontier:
            level += 1
            nxt = np.unique(np.concatenate([neighbours(i) for i in frontier]))
            nxt = nxt[dist[nxt] == UNREACHED]
            dist[nxt] = level
            frontier = list(nxt)
        return dist

    eccentricities = []
    first = None
    for s in specs:
        start = int(np.searchsorted(codes, M.encode(F, canonical_t(s)[None])[0]))
        dist = bfs(start)
        if first is None:
            first = dist
        eccentricities.append(int(dist.max()) if (dist >= 0).all() else None)
    reached = first >= 0
    counts = {int(d): int((first == d).sum()) for d in np.unique(first[reached])}
    connected = all(e is not None for e in eccentricities)
    diam = max(e for e in eccentricities if e is not None)
    return DistanceCensus(
        spec=AllInvolutions(n, F),
        counts=counts,
        diameter=diam,
        connected=connected,
        runtime_ms=(time.perf_counter() - t0) * 1000,
        unreached=int((~reached).sum()),
    )
