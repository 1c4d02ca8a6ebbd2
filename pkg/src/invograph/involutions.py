"""Involution classes X_k of GL_n(F) and the machinery around the base point t = I(n, k).

Class members are plain ``n x n`` integer matrices. Sets of members are
stacks of shape ``(count, n, n)``, sorted by their base-q code so that the
order is reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from math import prod

import numpy as np

from . import matrix as M
from .errors import ClassTooLarge, InvalidClass, InvalidM, NotInClass
from .gf import Field

DEFAULT_CLASS_CAP = 10**6


@dataclass(frozen=True)
class ClassSpec:
    """The conjugacy class X_k of involutions in GL_n(field)."""

    n: int
    k: int
    field: Field

    def __post_init__(self):
        n, k = self.n, self.k
        if n < 1 or k < 1:
            raise InvalidClass(f"need n, k >= 1 (got n={n}, k={k})")
        if self.field.char == 2 and 2 * k > n:
            raise InvalidClass(f"characteristic 2 requires k <= n/2 (got n={n}, k={k})")
        if self.field.char != 2 and k > n - 1:
            raise InvalidClass(f"odd characteristic requires k <= n-1 (got n={n}, k={k})")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def char(self) -> int:
        return self.field.char

    @property
    def label(self) -> str:
        return f"GL{self.n}(F{self.q}) k={self.k}"

    def as_dict(self) -> dict:
        F = self.field
        return {"n": self.n, "k": self.k, "p": F.p, "e": F.e, "poly": list(F.poly), "q": F.q}


def gl_order(n: int, q: int) -> int:
    return prod(q**n - q**i for i in range(n))


def centralizer_order(n: int, k: int, q: int, char: int) -> int:
    """|C_G(I(n,k))| in GL_n(F_q)."""
    if char != 2:
        return gl_order(n - k, q) * gl_order(k, q)
    return q ** ((n - k) ** 2 - (n - 2 * k) ** 2) * gl_order(k, q) * gl_order(n - 2 * k, q)


def class_size(spec: ClassSpec) -> int:
    return gl_order(spec.n, spec.q) // centralizer_order(spec.n, spec.k, spec.q, spec.char)


def canonical_t(spec: ClassSpec) -> np.ndarray:
    return M.involution_form(spec.field, spec.n, spec.k)


def class_of(x, F: Field):
    """k with x in X_k, or None when x is not a (valid-range) involution."""
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[0]
    if not M.is_involution(F, x):
        return None
    k = M.rank(F, M.sub(F, x, M.identity(n)))
    if k == 0:
        return None
    if F.char == 2:
        return k if 2 * k <= n else None
    return k if k <= n - 1 else None


def gl_generators(F: Field, n: int) -> list:
    """E_12(1), the n-cycle permutation matrix and diag(alpha, 1, ..., 1)."""
    gens = []
    if n >= 2:
        gens.append(M.elementary(F, n, 0, 1, 1))
        gens.append(np.roll(M.identity(n), 1, axis=0))
    if F.q > 2:
        d = M.identity(n)
        d[0, 0] = F.primitive_element
        gens.append(d)
    return gens


@dataclass
class Orbit:
    """An orbit of GL_n(F) acting by conjugation, with one conjugator per member.

    ``codes`` is sorted; ``members[i]`` has code ``codes[i]`` and
    ``members[i] = conjugators[i] @ base @ conjugators[i]^-1``.
    """

    field: Field
    base: np.ndarray
    codes: np.ndarray
    conjugators: np.ndarray

    def __len__(self):
        return self.codes.size

    @cached_property
    def members(self) -> np.ndarray:
        return M.decode(self.field, self.codes, self.base.shape[0])

    def index_of(self, codes) -> np.ndarray:
        """Positions of the given codes; -1 where absent."""
        codes = np.asarray(codes, dtype=np.uint64)
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, self.codes.size - 1)
        return np.where(self.codes[pos] == codes, pos, -1)

    def conjugator(self, i: int) -> np.ndarray:
        return self.conjugators[i].astype(np.int64)


def conjugation_orbit(F: Field, base, cap: int = DEFAULT_CLASS_CAP, chunk: int = 1 << 16) -> Orbit:
    """Closure of ``base`` under conjugation by the standard generators of GL_n(F)."""
    base = np.asarray(base, dtype=np.int64)
    n = base.shape[0]
    gens = gl_generators(F, n)
    gen_invs = [M.inverse(F, g) for g in gens]
    seen = M.encode(F, base[None])
    all_codes = [seen]
    all_conj = [M.identity(n)[None].astype(np.uint8)]
    front_x = base[None]
    front_g = M.identity(n)[None]
    while gens and front_x.shape[0]:
        cand_codes, cand_x, cand_g = [], [], []
        for g, gi in zip(gens, gen_invs):
            for s in range(0, front_x.shape[0], chunk):
                xs = front_x[s:s + chunk]
                y = M.matmul(F, M.matmul(F, g, xs), gi)
                cand_x.append(y)
                cand_g.append(M.matmul(F, g, front_g[s:s + chunk]))
                cand_codes.append(M.encode(F, y))
        codes = np.concatenate(cand_codes)
        uniq, first = np.unique(codes, return_index=True)
        pos = np.minimum(np.searchsorted(seen, uniq), seen.size - 1)
        fresh = seen[pos] != uniq
        first = first[fresh]
        if first.size == 0:
            break
        xs = np.concatenate(cand_x)[first]
        gs = np.concatenate(cand_g)[first]
        seen = np.union1d(seen, uniq[fresh])
        if seen.size > cap:
            raise ClassTooLarge(f"orbit exceeds cap {cap}")
        all_codes.append(uniq[fresh])
        all_conj.append(gs.astype(np.uint8))
        front_x, front_g = xs, gs
    codes = np.concatenate(all_codes)
    conj = np.concatenate(all_conj)
    order = np.argsort(codes, kind="stable")
    return Orbit(F, base, codes[order], conj[order])


def enumerate_class(spec: ClassSpec, cap: int = DEFAULT_CLASS_CAP) -> Orbit:
    size = class_size(spec)
    if size > cap:
        raise ClassTooLarge(f"|X_k| = {size} for {spec.label} exceeds cap {cap}")
    return conjugation_orbit(spec.field, canonical_t(spec), cap=cap)


def involutions_with_identity(F: Field, m: int) -> list:
    """All x in GL_m(F) with x^2 = I, grouped by rank(x - I): entry j is a stack."""
    if m == 0:
        return [np.zeros((1, 0, 0), dtype=np.int64)]
    out = [M.identity(m)[None]]
    top = m // 2 if F.char == 2 else m
    for j in range(1, top + 1):
        out.append(conjugation_orbit(F, M.involution_form(F, m, j)).members)
    for _ in range(top + 1, m + 1):
        out.append(np.zeros((0, m, m), dtype=np.int64))
    return out


def _sort_unique(F: Field, mats) -> np.ndarray:
    n = mats.shape[-1]
    if mats.shape[0] == 0:
        return mats.reshape(0, n, n)
    codes = np.unique(M.encode(F, mats))
    return M.decode(F, codes, n)


def delta1(spec: ClassSpec) -> np.ndarray:
    """All class members x != t commuting with t, built from the partitioned shapes of the centralizer."""
    F, n, k = spec.field, spec.n, spec.k
    t = canonical_t(spec)
    if F.char != 2:
        upper = involutions_with_identity(F, n - k)
        lower = involutions_with_identity(F, k)
        found = []
        for j in range(0, min(k, n - k) + 1):
            A, C = upper[j], lower[k - j]
            if A.shape[0] == 0 or C.shape[0] == 0:
                continue
            x = np.zeros((A.shape[0], C.shape[0], n, n), dtype=np.int64)
            x[:, :, : n - k, : n - k] = A[:, None]
            x[:, :, n - k :, n - k :] = C[None, :]
            found.append(x.reshape(-1, n, n))
        x = np.concatenate(found)
    else:
        x = _delta1_char2(F, n, k)
    keep = ~np.all(x == t, axis=(1, 2))
    return _sort_unique(F, x[keep])


def _delta1_char2(F: Field, n: int, k: int) -> np.ndarray:
    # blocks (a, k, k): x = [[P, Q, 0], [0, C, 0], [R, S, C]]
    a = n - 2 * k
    Ps = np.concatenate(involutions_with_identity(F, a))
    Cs = np.concatenate(involutions_with_identity(F, k))
    Ia, Ik = M.identity(a), M.identity(k)
    found = []
    for P in Ps:
        for C in Cs:
            # P Q = Q C  and  R P = C R
            q_basis = M.nullspace(F, M.sub(F, M.kron(F, P, Ik), M.kron(F, Ia, C.T)))
            r_basis = M.nullspace(F, M.sub(F, M.kron(F, Ik, P.T), M.kron(F, C, Ia)))
            Qs = M.all_combinations(F, q_basis)
            Qs = Qs.reshape(Qs.shape[0], a, k)
            Rs = M.all_combinations(F, r_basis)
            Rs = Rs.reshape(Rs.shape[0], k, a)
            # S C + C S = R Q
            lin = M.add(F, M.kron(F, Ik, C.T), M.kron(F, C, Ik))
            red, piv = M.rref(F, np.hstack([lin, M.identity(k * k)]))
            E = red[:, k * k :]
            piv = [c for c in piv if c < k * k]
            rk = len(piv)
            s_free = M.all_combinations(F, M.nullspace(F, lin))
            RQ = M.matmul(F, Rs[:, None], Qs[None, :]).reshape(-1, k * k)
            ri, qi = np.divmod(np.arange(Rs.shape[0] * Qs.shape[0]), Qs.shape[0])
            img = M.matmul(F, RQ, E.T)
            ok = ~img[:, rk:].any(axis=1)
            if not ok.any():
                continue
            part = np.zeros((int(ok.sum()), k * k), dtype=np.int64)
            part[:, piv] = img[ok][:, : len(piv)]
            S = F.add_table[part[:, None, :], s_free[None, :, :]].reshape(-1, k, k)
            count = S.shape[0]
            per = s_free.shape[0]
            sel_q = np.repeat(qi[ok], per)
            sel_r = np.repeat(ri[ok], per)
            x = np.zeros((count, n, n), dtype=np.int64)
            x[:, :a, :a] = P
            x[:, :a, a : a + k] = Qs[sel_q]
            x[:, a : a + k, a : a + k] = C
            x[:, a + k :, :a] = Rs[sel_r]
            x[:, a + k :, a : a + k] = S
            x[:, a + k :, a + k :] = C
            found.append(x)
    x = np.concatenate(found)
    I = M.identity(n)
    ranks = M.batch_rank(F, M.sub(F, x, I[None]))
    return x[ranks == k]


def delta1_by_filter(spec: ClassSpec, orbit: Orbit | None = None) -> np.ndarray:
    """Reference enumeration: filter the whole class for members commuting with t."""
    F = spec.field
    orbit = enumerate_class(spec) if orbit is None else orbit
    t = canonical_t(spec)
    X = orbit.members
    comm = np.all(M.matmul(F, X, t) == M.matmul(F, t, X), axis=(1, 2))
    comm &= ~np.all(X == t, axis=(1, 2))
    return X[comm]


def delta1_shape_check(x, spec: ClassSpec) -> bool:
    """True iff x has the partitioned shape of a neighbour of t (and is a class member)."""
    F, n, k = spec.field, spec.n, spec.k
    x = np.asarray(x, dtype=np.int64)
    t = canonical_t(spec)
    if np.array_equal(x, t) or class_of(x, F) != k:
        return False
    if F.char != 2:
        return not x[: n - k, n - k :].any() and not x[n - k :, : n - k].any()
    a = n - 2 * k
    P, Q = x[:a, :a], x[:a, a : a + k]
    C = x[a : a + k, a : a + k]
    if x[:a, a + k :].any() or x[a : a + k, :a].any() or x[a : a + k, a + k :].any():
        return False
    if not np.array_equal(x[a + k :, a + k :], C):
        return False
    Ap = x[: n - k, : n - k]
    B = x[n - k :, : n - k]
    if not np.array_equal(M.matmul(F, B, Ap), M.matmul(F, C, B)):
        return False
    if a and not M.is_involution(F, P):
        return False
    return bool(np.array_equal(M.matmul(F, P, Q), M.matmul(F, Q, C)) and M.is_involution(F, C))


# --- the auxiliary involutions t_m and permutations w_m --------------------


def _perm_matrix(blocks_sizes, order) -> np.ndarray:
    """Permutation moving block ``order[i]`` into slot i (as a block permutation matrix)."""
    offsets = np.concatenate([[0], np.cumsum(blocks_sizes)])
    n = int(offsets[-1])
    P = M.zeros(n, n)
    r = 0
    for src in order:
        for j in range(blocks_sizes[src]):
            P[r + j, offsets[src] + j] = 1
        r += blocks_sizes[src]
    return P


def make_wm(spec: ClassSpec, m: int) -> np.ndarray:
    n, k = spec.n, spec.k
    _check_m(spec, m)
    if spec.char != 2:
        return _perm_matrix([n - 2 * k + m, k - m, m, k - m], [0, 3, 2, 1])
    return _perm_matrix([n - 2 * k + m, k - m, k - m, m], [0, 2, 1, 3])


def _check_m(spec: ClassSpec, m: int):
    if not max(2 * spec.k - spec.n, 0) <= m <= spec.k:
        raise InvalidM(f"m={m} outside [{max(2 * spec.k - spec.n, 0)}, {spec.k}]")


def _tm_char2_upper(n: int, k: int, m: int) -> np.ndarray:
    """The characteristic-2 form of t_m for 2m >= k."""
    a = n - 2 * k
    x = M.identity(n)
    # the diagonal blocks carry their unipotent part in the leading columns
    j = M.identity(k)
    for i in range(k - m):
        j[m + i, i] = 1
    x[a : a + k, a : a + k] = j
    x[a + k :, a + k :] = j
    mid = M.zeros(k, k)
    for i in range(2 * m - k):
        mid[k - m + i, k - m + i] = 1
    x[a + k :, a : a + k] = mid
    return x


def make_tm(spec: ClassSpec, m: int) -> np.ndarray:
    F, n, k = spec.field, spec.n, spec.k
    _check_m(spec, m)
    if F.char != 2:
        return M.block_diag(M.involution_form(F, n - k, k - m), F.neg(M.involution_form(F, k, k - m)))
    if 2 * m >= k:
        return _tm_char2_upper(n, k, m)
    return _tm_char2_upper(n, k, k - m).T.copy()


def tm_identity_holds(spec: ClassSpec, m: int) -> bool:
    """The conjugation identity linking t_m back to t (or to t^T when 2m < k in characteristic 2)."""
    F = spec.field
    t = canonical_t(spec)
    tm = make_tm(spec, m)
    if F.char == 2 and 2 * m < spec.k:
        w = make_wm(spec, spec.k - m)
        return bool(np.array_equal(M.mul_chain(F, w, tm, w), t.T))
    w = make_wm(spec, m)
    return bool(np.array_equal(M.mul_chain(F, w, tm, w), t))


def commutator_space(F: Field, x) -> M.SubspaceBasis:
    """[V, x] = image of x - 1."""
    x = np.asarray(x, dtype=np.int64)
    return M.image_basis(F, M.sub(F, x, M.identity(x.shape[0])))


def meet_dim(spec: ClassSpec, x) -> int:
    """dim([V, t] cap [V, x]), with [V, t] spanned by the last k coordinates."""
    F, n, k = spec.field, spec.n, spec.k
    d = M.sub(F, np.asarray(x, dtype=np.int64), M.identity(n))
    return k - M.rank(F, d[: n - k])


def batch_meet_dim(spec: ClassSpec, xs) -> np.ndarray:
    F, n, k = spec.field, spec.n, spec.k
    d = F.sub_table[np.asarray(xs, dtype=np.int64), M.identity(n)[None]]
    return k - M.batch_rank(F, d[:, : n - k])


def is_block_lower(spec: ClassSpec, x) -> bool:
    n, k = spec.n, spec.k
    return not np.asarray(x)[: n - k, n - k :].any()


def transport(spec: ClassSpec, x) -> tuple:
    """g in C_G([V, t]) (zero top-right block) with g . [V, t_m] = [V, x]; returns (g, m)."""
    F, n, k = spec.field, spec.n, spec.k
    x = np.asarray(x, dtype=np.int64)
    if class_of(x, F) != k:
        raise NotInClass("x is not in the class")
    U = commutator_space(F, canonical_t(spec))
    Wx = commutator_space(F, x)
    m = M.intersection_dim(F, U, Wx)
    Wm = commutator_space(F, make_tm(spec, m))
    src = _adapted_basis(F, U, Wm, n)
    dst = _adapted_basis(F, U, Wx, n)
    g = M.matmul(F, dst, M.inverse(F, src))
    return g, m


def _adapted_basis(F: Field, U, W, n) -> np.ndarray:
    """Columns: basis of U cap W, completion to U, completion to W, completion to V."""
    meet = M.intersection_basis(F, U, W).vectors
    ub = M.extend_basis(F, meet, U.vectors)
    wb = M.extend_basis(F, ub, W.vectors)
    return M.extend_basis(F, wb, M.identity(n))


@dataclass
class Decomposition:
    """x = h y h^-1 with y the middle matrix of the normal form."""

    h: np.ndarray
    y: np.ndarray
    m: int
    g: np.ndarray
    B: np.ndarray = dc_field(repr=False)


def decompose_general(spec: ClassSpec, x) -> Decomposition:
    F, n, k = spec.field, spec.n, spec.k
    x = np.asarray(x, dtype=np.int64)
    g, m = transport(spec, x)
    g_inv = M.inverse(F, g)
    if F.char != 2:
        w = make_wm(spec, m)
        xp = M.mul_chain(F, w, g_inv, x, g, w)
        B = xp[n - k :, : n - k]
        a = n - 2 * k + m
        B1, B2 = B[:m, :a], B[:m, a:]
        B3, B4 = B[m:, :a], B[m:, a:]
        half = F.inv(F.from_int(2))
        sizes = [a, k - m, m, k - m]
        off = np.concatenate([[0], np.cumsum(sizes)])

        def blk(mat, i, j, val):
            mat[off[i] : off[i + 1], off[j] : off[j + 1]] = val

        hp = M.identity(n)
        blk(hp, 1, 0, F.mul(half, B3))
        blk(hp, 2, 0, F.mul(half, B1))
        blk(hp, 2, 3, F.mul(half, B2))
        y = make_tm(spec, m)
        blk(y, 1, 3, B4)
        h = M.matmul(F, g, hp)
        return Decomposition(h, y, m, g, B)
    if 2 * m >= k:
        h = M.matmul(F, g, make_wm(spec, m))
    else:
        h = M.mul_chain(F, g, make_wm(spec, k - m), make_wm(spec, 0))
    y = M.mul_chain(F, M.inverse(F, h), x, h)
    return Decomposition(h, y, m, g, y[n - k :, : n - k])


# --- centralizer of t ----------------------------------------------------


def centralizer_algebra(F: Field, t) -> np.ndarray:
    """Basis (columns, row-major vec) of {X : X t = t X}."""
    t = np.asarray(t, dtype=np.int64)
    n = t.shape[0]
    I = M.identity(n)
    return M.nullspace(F, M.sub(F, M.kron(F, I, t.T), M.kron(F, t, I)))


def random_centralizer_elements(F: Field, t, count: int, seed: int = 0) -> list:
    """Random invertible elements of C_G(t); they generate some subgroup of it."""
    rng = np.random.default_rng(seed)
    basis = centralizer_algebra(F, t)
    n = np.asarray(t).shape[0]
    out = []
    while len(out) < count:
        c = rng.integers(0, F.q, size=basis.shape[1])
        g = M.matmul(F, basis, c[:, None])[:, 0].reshape(n, n)
        if M.is_invertible(F, g):
            out.append(g)
    return out
