"""Dense exact linear algebra over a :class:`~invograph.gf.Field`.

Matrices are numpy ``int64`` arrays whose entries are field elements in the
integer encoding of :mod:`invograph.gf`. Products accept leading batch axes,
everything else works on a single 2-d matrix. Row reduction has a packed
GF(2) path (rows as Python ints, XOR elimination) that must agree with the
table-driven generic path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AmbientMismatch, DimensionMismatch, NotInvolution, Singular
from .gf import Field


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def e_unit(n: int, i: int, j: int, cols: int | None = None) -> np.ndarray:
    """The matrix unit e_ij (0-based)."""
    m = zeros(n, n if cols is None else cols)
    m[i, j] = 1
    return m


def elementary(F: Field, n: int, i: int, j: int, a: int) -> np.ndarray:
    """E_ij(a) = I + a e_ij."""
    m = identity(n)
    m[i, j] = F.add(m[i, j], a)
    return m


def asmat(F: Field, a) -> np.ndarray:
    """Coerce nested integer data to a matrix; for prime fields integers are reduced mod p."""
    m = np.asarray(a, dtype=np.int64)
    if F.is_prime:
        return m % F.p
    if m.size and (m.min() < 0 or m.max() >= F.q):
        raise ValueError("entries must be encoded field elements in range(q)")
    return m


def _check_same_shape(a, b):
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")


def add(F: Field, a, b):
    _check_same_shape(a, b)
    return F.add_table[a, b]


def sub(F: Field, a, b):
    _check_same_shape(a, b)
    return F.sub_table[a, b]


def neg(F: Field, a):
    return F.neg_table[a]


def scale(F: Field, c: int, a):
    return F.mul_table[c, a]


def matmul(F: Field, a, b):
    """Product over F, broadcasting over leading batch axes."""
    if a.shape[-1] != b.shape[-2]:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if F.is_prime:
        return np.matmul(a, b) % F.p
    out_shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (a.shape[-2], b.shape[-1])
    acc = np.zeros(out_shape, dtype=np.int64)
    mul, addt = F.mul_table, F.add_table
    for k in range(a.shape[-1]):
        acc = addt[acc, mul[a[..., :, k, None], b[..., None, k, :]]]
    return acc


def mul_chain(F: Field, *mats):
    out = mats[0]
    for m in mats[1:]:
        out = matmul(F, out, m)
    return out


def transpose(a):
    return np.swapaxes(a, -1, -2)


def block_compose(layout) -> np.ndarray:
    """Assemble a partitioned matrix from a rectangular grid of blocks."""
    try:
        return np.block([[np.asarray(b, dtype=np.int64) for b in row] for row in layout])
    except ValueError as exc:
        raise DimensionMismatch(str(exc)) from exc


def block_diag(*blocks) -> np.ndarray:
    blocks = [np.asarray(b, dtype=np.int64) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    out = zeros(n, m)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


# --- row reduction -------------------------------------------------------


def _rref_generic(F: Field, m: np.ndarray):
    R = np.array(m, dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        R[r] = F.mul_table[F.inv_table[R[r, c]], R[r]]
        factors = R[:, c].copy()
        factors[r] = 0
        if factors.any():
            R = F.sub_table[R, F.mul_table[factors[:, None], R[r][None, :]]]
        pivots.append(c)
        r += 1
    return R, pivots


def _pack_rows(m: np.ndarray) -> list:
    weights = [1 << j for j in range(m.shape[1])]
    return [sum(w for w, v in zip(weights, row) if v) for row in m.tolist()]


def _rref_gf2(m: np.ndarray):
    rows, cols = m.shape
    packed = _pack_rows(m)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        bit = 1 << c
        piv = next((i for i in range(r, rows) if packed[i] & bit), None)
        if piv is None:
            continue
        packed[r], packed[piv] = packed[piv], packed[r]
        prow = packed[r]
        for i in range(rows):
            if i != r and packed[i] & bit:
                packed[i] ^= prow
        pivots.append(c)
        r += 1
    R = np.array([[(v >> j) & 1 for j in range(cols)] for v in packed], dtype=np.int64).reshape(rows, cols)
    return R, pivots


def rref(F: Field, m, fast: bool = True):
    """Reduced row echelon form and pivot columns."""
    m = np.asarray(m, dtype=np.int64)
    if m.size == 0:
        return m.copy(), []
    if fast and F.q == 2:
        return _rref_gf2(m)
    return _rref_generic(F, m)


def rank(F: Field, m) -> int:
    return len(rref(F, m)[1])


def inverse(F: Field, m) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    n = m.shape[0]
    if m.shape != (n, n):
        raise DimensionMismatch("inverse needs a square matrix")
    R, piv = rref(F, np.hstack([m, identity(n)]))
    if piv[:n] != list(range(n)):
        raise Singular("matrix is singular")
    return R[:, n:]


def is_invertible(F: Field, m) -> bool:
    return rank(F, m) == np.asarray(m).shape[0]


def conjugate(F: Field, g, x, g_inv=None):
    """g x g^-1."""
    if g_inv is None:
        g_inv = inverse(F, g)
    return matmul(F, matmul(F, g, x), g_inv)


def nullspace(F: Field, m) -> np.ndarray:
    """Basis of {v : m v = 0} as the columns of an (cols x d) matrix."""
    m = np.asarray(m, dtype=np.int64)
    cols = m.shape[1]
    R, piv = rref(F, m)
    free = [c for c in range(cols) if c not in piv]
    basis = zeros(cols, len(free))
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(piv):
            basis[pc, j] = F.neg(R[i, f])
    return basis


def rank_normal_form(F: Field, m):
    """Invertible P, Q with P m Q = [[I_r, 0], [0, 0]]; returns (P, Q, r)."""
    m = np.asarray(m, dtype=np.int64)
    rows, cols = m.shape
    R, piv = rref(F, np.hstack([m, identity(rows)]))
    piv = [c for c in piv if c < cols]
    P = R[:, cols:]
    R = R[:, :cols]
    r = len(piv)
    order = piv + [c for c in range(cols) if c not in piv]
    perm = zeros(cols, cols)
    perm[order, range(cols)] = 1
    X = matmul(F, R, perm)[:r, r:]
    clear = identity(cols)
    clear[:r, r:] = F.neg(X)
    return P, matmul(F, perm, clear), r


# --- subspaces -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Column space in reduced column-echelon form (a canonical representative)."""

    ambient_dim: int
    vectors: np.ndarray  # ambient_dim x dim

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, SubspaceBasis)
            and self.ambient_dim == other.ambient_dim
            and np.array_equal(self.vectors, other.vectors)
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.vectors.tobytes()))


def image_basis(F: Field, m) -> SubspaceBasis:
    m = np.asarray(m, dtype=np.int64)
    R, piv = rref(F, m.T)
    return SubspaceBasis(m.shape[0], R[: len(piv)].T.copy())


def span(F: Field, vectors) -> SubspaceBasis:
    return image_basis(F, np.asarray(vectors, dtype=np.int64))


def intersection_dim(F: Field, a: SubspaceBasis, b: SubspaceBasis) -> int:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch("subspaces live in different spaces")
    return a.dim + b.dim - rank(F, np.hstack([a.vectors, b.vectors]))


def intersection_basis(F: Field, a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch("subspaces live in different spaces")
    if a.dim == 0 or b.dim == 0:
        return SubspaceBasis(a.ambient_dim, zeros(a.ambient_dim, 0))
    ns = nullspace(F, np.hstack([a.vectors, b.vectors]))
    return image_basis(F, matmul(F, a.vectors, ns[: a.dim]))


def extend_basis(F: Field, vectors, candidates) -> np.ndarray:
    """Append first-fit columns of ``candidates`` to the independent columns of ``vectors``
    until they span the span of both."""
    cur = np.asarray(vectors, dtype=np.int64)
    r = rank(F, cur) if cur.shape[1] else 0
    for j in range(candidates.shape[1]):
        trial = np.hstack([cur, candidates[:, j:j + 1]])
        rt = rank(F, trial)
        if rt > r:
            cur, r = trial, rt
    return cur


def complete_basis(F: Field, vectors, n: int | None = None) -> np.ndarray:
    """Extend independent columns to an invertible matrix using coordinate vectors."""
    vectors = np.asarray(vectors, dtype=np.int64)
    n = vectors.shape[0] if n is None else n
    return extend_basis(F, vectors.reshape(n, -1), identity(n))


# --- involutions -----------------------------------------------------------


def involution_form(F: Field, n: int, k: int) -> np.ndarray:
    """The canonical involution I(n, k) for the characteristic of F."""
    if F.char != 2:
        return block_diag(identity(n - k), F.neg(1) * identity(k))
    return jordan_form(n, k)


def jordan_form(n: int, k: int) -> np.ndarray:
    """J(n, k): identity plus I_k in rows n-k.., columns n-2k.. (valid in characteristic 2)."""
    m = identity(n)
    for i in range(k):
        m[n - k + i, n - 2 * k + i] = 1
    return m


def is_involution(F: Field, a) -> bool:
    a = np.asarray(a, dtype=np.int64)
    return bool(np.array_equal(matmul(F, a, a), identity(a.shape[0])))


class Canonical(NamedTuple):
    P: np.ndarray
    k: int
    degenerate: bool  # True for +-I


def canonicalize_involution(F: Field, a) -> Canonical:
    """Find P and k with a = P I(n,k) P^-1."""
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    if a.shape != (n, n) or not is_involution(F, a):
        raise NotInvolution("matrix does not square to the identity")
    I = identity(n)
    if F.char != 2:
        plus = nullspace(F, sub(F, a, I))
        minus = nullspace(F, add(F, a, I))
        k = minus.shape[1]
        return Canonical(np.hstack([plus, minus]), k, k in (0, n))
    N = sub(F, a, I)
    _, piv = rref(F, N)
    k = len(piv)
    if k == 0:
        return Canonical(I.copy(), 0, True)
    M = I[:, piv]
    L = N[:, piv]
    fixed = extend_basis(F, L, nullspace(F, N))[:, k:]
    return Canonical(np.hstack([fixed, M, L]), k, False)


# --- hashing ---------------------------------------------------------------


def code_weights(F: Field, rows: int, cols: int) -> np.ndarray:
    size = rows * cols
    if F.q**size > 2**64:
        raise OverflowError(f"{rows}x{cols} matrices over GF({F.q}) do not fit a 64-bit code")
    return np.array([F.q**i for i in range(size)], dtype=np.uint64)


def encode(F: Field, mats) -> np.ndarray:
    """Base-q integer code of each matrix (row-major, first entry least significant)."""
    mats = np.asarray(mats)
    rows, cols = mats.shape[-2:]
    flat = mats.reshape(mats.shape[:-2] + (rows * cols,)).astype(np.uint64)
    w = code_weights(F, rows, cols)
    if F.q == 2:
        out = np.zeros(flat.shape[:-1], dtype=np.uint64)
        for i in range(rows * cols):
            out |= flat[..., i] << np.uint64(i)
        return out
    return (flat * w).sum(axis=-1, dtype=np.uint64)


def decode(F: Field, codes, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    codes = np.asarray(codes, dtype=np.uint64)
    out = np.empty(codes.shape + (rows * cols,), dtype=np.int64)
    q = np.uint64(F.q)
    c = codes.copy()
    for i in range(rows * cols):
        out[..., i] = (c % q).astype(np.int64)
        c //= q
    return out.reshape(codes.shape + (rows, cols))


def gf2_matmul_codes(a, b, n: int) -> np.ndarray:
    """Product of bit-packed n x n GF(2) matrices (bit i*n+j holds entry (i, j))."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    mask = np.uint64((1 << n) - 1)
    brows = [(b >> np.uint64(k * n)) & mask for k in range(n)]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.uint64)
    one = np.uint64(1)
    for i in range(n):
        arow = a >> np.uint64(i * n)
        acc = np.zeros_like(out)
        for k in range(n):
            acc ^= brows[k] * ((arow >> np.uint64(k)) & one)
        out |= acc << np.uint64(i * n)
    return out


def batch_rank(F: Field, mats) -> np.ndarray:
    """Ranks of a stack of matrices, eliminating all of them in lockstep."""
    A = np.array(mats, dtype=np.int64, copy=True)
    if A.ndim == 2:
        A = A[None]
    nb, rows, cols = A.shape
    rk = np.zeros(nb, dtype=np.int64)
    row_idx = np.arange(rows)
    for c in range(cols):
        elig = (A[:, :, c] != 0) & (row_idx[None, :] >= rk[:, None])
        has = elig.any(axis=1)
        if not has.any():
            continue
        b = np.flatnonzero(has)
        piv = elig[b].argmax(axis=1)
        tgt = rk[b]
        prow = A[b, piv].copy()
        A[b, piv] = A[b, tgt]
        prow = F.mul_table[F.inv_table[prow[:, c]][:, None], prow]
        A[b, tgt] = prow
        f = A[b, :, c].copy()
        f[np.arange(b.size), tgt] = 0
        A[b] = F.sub_table[A[b], F.mul_table[f[:, :, None], prow[:, None, :]]]
        rk[b] += 1
    return rk


def kron(F: Field, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = F.mul_table[a[:, None, :, None], b[None, :, None, :]]
    return out.reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])


def all_combinations(F: Field, basis) -> np.ndarray:
    """Every F-linear combination of the columns of ``basis`` (returned as rows)."""
    basis = np.asarray(basis, dtype=np.int64)
    d = basis.shape[1]
    if d == 0:
        return np.zeros((1, basis.shape[0]), dtype=np.int64)
    coeffs = np.indices((F.q,) * d).reshape(d, -1).T
    return matmul(F, coeffs, basis.T)
