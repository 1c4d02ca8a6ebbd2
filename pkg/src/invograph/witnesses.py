"""Explicit far-away involutions and explicit short paths.

Lower bounds are never trusted: every constructed involution is checked
against all of Delta_1(t) (or Delta_1(t) x Delta_1(t^T)). Upper bounds come as
PathCertificate objects that are validated before they are returned.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import matrix as M
from .errors import BranchUnavailable, InvalidClass, NoIrreducible, NotInClass, NotLowerTriangular, Unsupported, WitnessFailed
from .gf import Field, irreducible_polys
from .graph import PathCertificate, adjacent, commuting_mask
from .involutions import ClassSpec, canonical_t, class_of, decompose_general, delta1, is_block_lower


@dataclass
class WitnessReport:
    case: str
    spec: ClassSpec
    matrices: dict
    bound: str
    method: str
    runtime_ms: float
    details: dict = dc_field(default_factory=dict)
    certificate: PathCertificate | None = None

    def as_dict(self) -> dict:
        out = {
            "case": self.case,
            "spec": self.spec.as_dict(),
            "bound": self.bound,
            "method": self.method,
            "details": self.details,
            "matrices": {name: np.asarray(m).tolist() for name, m in self.matrices.items()},
            "runtime_ms": round(self.runtime_ms, 3),
        }
        if self.certificate is not None:
            out["certificate_length"] = self.certificate.length
        return out


def _trim(F: Field, chain) -> list:
    """Drop repeated vertices and shortcut any vertex adjacent to a later one."""
    chain = [np.asarray(c, dtype=np.int64) for c in chain]
    out = [chain[0]]
    i = 0
    while i < len(chain) - 1:
        j = len(chain) - 1
        while j > i + 1 and not (np.array_equal(chain[i], chain[j]) or adjacent(chain[i], chain[j], F)):
            j -= 1
        if not np.array_equal(chain[i], chain[j]):
            out.append(chain[j])
        i = j
    return out


def _certificate(spec: ClassSpec, chain, note: str = "") -> PathCertificate:
    cert = PathCertificate(spec.field, _trim(spec.field, chain), spec.k, note)
    problems = cert.problems()
    if problems:
        raise WitnessFailed("; ".join(problems))
    return cert


def delta1_commuting(spec: ClassSpec, x) -> int:
    """Number of members of Delta_1(t) commuting with x."""
    d1 = delta1(spec)
    return int(commuting_mask(spec.field, d1, np.asarray(x, dtype=np.int64)[None])[:, 0].sum())


# --- lower bounds: involutions at distance >= 3 -----------------------------


def shift_minus_two(F: Field, k: int) -> np.ndarray:
    """Subdiagonal shift minus 2I; only -I among involutions commutes with it."""
    a = M.zeros(k, k)
    for i in range(k - 1):
        a[i + 1, i] = 1
    return M.sub(F, a, M.scale(F, F.from_int(2), M.identity(k)))


def _sign_swap(F: Field, n: int, k: int) -> np.ndarray:
    """Permutation sigma with sigma (-I(n, n-k)) sigma^-1 = I(n, k)."""
    return np.roll(M.identity(n), n - k, axis=0)


def far_involution_odd(n: int, k: int, F: Field) -> np.ndarray:
    """An involution of X_k (odd characteristic) commuting with nothing in Delta_1(t)."""
    if F.char == 2:
        raise BranchUnavailable("odd characteristic only")
    if n < 2 * k:
        # x -> -x identifies X_{n-k} with X_k
        y = far_involution_odd(n, n - k, F)
        s = _sign_swap(F, n, k)
        return M.conjugate(F, s, M.neg(F, y), M.inverse(F, s))
    if not n < 4 * k:
        raise BranchUnavailable(f"need 2k <= n < 4k (n={n}, k={k})")
    a = n - 2 * k
    A = shift_minus_two(F, k)
    I, Z = M.identity, M.zeros
    minus = M.neg(F, I(k))
    if n < 3 * k:
        mid = M.block_compose([[I(a), Z(a, k), Z(a, k)], [Z(k, a), minus, I(k)], [Z(k, a), Z(k, k), I(k)]])
        g = M.block_compose([[I(a), Z(a, k), Z(a, k)], [Z(k, a), I(k), Z(k, k)], [Z(k, a), A, I(k)]])
    else:
        tail = np.hstack([Z(k, a - k), I(k)])
        mid = M.block_compose([[I(a), Z(a, k), Z(a, k)], [tail, minus, I(k)], [Z(k, a), Z(k, k), I(k)]])
        # both tails of g carry -I; with +I in the last row the witness fails the scan
        g = M.block_compose([[I(a), Z(a, k), Z(a, k)], [M.neg(F, tail), I(k), Z(k, k)], [M.neg(F, tail), A, I(k)]])
    return M.conjugate(F, g, mid)


def companion(F: Field, poly) -> np.ndarray:
    """Companion matrix of a monic polynomial (coefficients constant first)."""
    k = len(poly) - 1
    c = M.zeros(k, k)
    for i in range(k - 1):
        c[i + 1, i] = 1
    c[:, k - 1] = F.neg(np.asarray(poly[:k], dtype=np.int64))
    return c


def far_involution_char2(n: int, k: int, F: Field) -> np.ndarray:
    """An involution of X_k (characteristic 2) commuting with nothing in Delta_1(t)."""
    if F.char != 2:
        raise BranchUnavailable("characteristic 2 only")
    if not 2 * k <= n < 4 * k or (n == 2 * k and k % 2):
        raise BranchUnavailable(f"need 2k <= n < 4k, not n = 2k with k odd (n={n}, k={k})")
    # B must be invertible, which rules out the polynomial x when k = 1
    poly = next((f for f in irreducible_polys(F, k) if f[0]), None)
    if poly is None:
        raise NoIrreducible(f"no irreducible polynomial of degree {k}")
    B = companion(F, poly)
    a = n - 2 * k
    A = M.zeros(k, a) if n < 3 * k else np.hstack([B, M.zeros(k, a - k)])
    I, Z = M.identity, M.zeros
    return M.block_compose([[I(a), Z(a, k), Z(a, k)], [A, I(k), B], [Z(k, a), Z(k, k), I(k)]])


def verify_far_involution(spec: ClassSpec, x, case: str = "") -> WitnessReport:
    """Exhaustive check that x commutes with no member of Delta_1(t), i.e. d(t, x) >= 3."""
    t0 = time.perf_counter()
    F = spec.field
    x = np.asarray(x, dtype=np.int64)
    if class_of(x, F) != spec.k:
        raise WitnessFailed("witness is not in the class")
    t = canonical_t(spec)
    if np.array_equal(x, t) or adjacent(x, t, F):
        raise WitnessFailed("witness is within distance 1 of t")
    hits = delta1_commuting(spec, x)
    if hits:
        raise WitnessFailed(f"witness commutes with {hits} members of Delta_1(t)")
    return WitnessReport(
        case=case,
        spec=spec,
        matrices={"x": x},
        bound=">= 3",
        method="exhaustive Delta_1 scan",
        runtime_ms=(time.perf_counter() - t0) * 1000,
        details={"delta1_size": int(delta1(spec).shape[0]), "commuting": 0},
    )


def transpose_lower_bound(k: int, F: Field) -> WitnessReport:
    """d(t, t^T) >= 4 in X_k of GL_2k (characteristic 2, k odd) by scanning Delta_1(t) x Delta_1(t^T)."""
    t0 = time.perf_counter()
    if F.char != 2 or k % 2 == 0:
        raise BranchUnavailable("characteristic 2 with k odd only")
    spec = ClassSpec(2 * k, k, F)
    t = canonical_t(spec)
    tt = t.T.copy()
    d1 = delta1(spec)
    d1t = np.ascontiguousarray(np.transpose(d1, (0, 2, 1)))
    if np.array_equal(t, tt) or adjacent(t, tt, F):
        raise WitnessFailed("t and t^T are at distance <= 1")
    if commuting_mask(F, d1, tt[None]).any():
        raise WitnessFailed("t and t^T have a common neighbour")
    pairs = int(commuting_mask(F, d1, d1t).sum())
    if pairs:
        raise WitnessFailed(f"{pairs} commuting pairs in Delta_1(t) x Delta_1(t^T)")
    meet = M.intersection_dim(F, M.image_basis(F, M.sub(F, t, M.identity(2 * k))), M.image_basis(F, M.sub(F, tt, M.identity(2 * k))))
    return WitnessReport(
        case="lemma27",
        spec=spec,
        matrices={"t": t, "tT": tt},
        bound=">= 4",
        method="exhaustive Delta_1(t) x Delta_1(t^T) scan",
        runtime_ms=(time.perf_counter() - t0) * 1000,
        details={"delta1_size": int(d1.shape[0]), "pairs_scanned": int(d1.shape[0]) ** 2, "commuting": 0, "meet_dim": meet},
    )


# --- upper bounds: explicit paths ------------------------------------------


def path_lower_triangular(x, spec: ClassSpec) -> PathCertificate:
    """Path from t to a block-lower-triangular x of length <= 2 (<= 3 for n = 2k, k odd, odd characteristic)."""
    F = spec.field
    x = np.asarray(x, dtype=np.int64)
    if class_of(x, F) != spec.k:
        raise NotInClass("x is not in the class")
    if not is_block_lower(spec, x):
        raise NotLowerTriangular("x has a nonzero upper-right block")
    t = canonical_t(spec)
    if np.array_equal(x, t) or adjacent(t, x, F):
        return _certificate(spec, [t, x])
    if F.char == 2:
        return _certificate(spec, [t, _lower_middle_char2(spec, x), x])
    return _lower_path_odd(spec, x)


def _lower_middle_char2(spec: ClassSpec, x) -> np.ndarray:
    """s = [[I, 0], [D, I]] with rank D = k and D A = C D, so s is adjacent to both t and x."""
    F, n, k = spec.field, spec.n, spec.k
    a = n - k
    A, C = x[:a, :a], x[a:, a:]
    ca, cc = M.canonicalize_involution(F, A), M.canonicalize_involution(F, C)
    k1, k2 = ca.k, cc.k
    af, cf = a - 2 * k1, k - 2 * k2
    # intertwiner between the canonical forms: Jordan pairs onto Jordan pairs,
    # then fixed vectors (and spare pair heads) onto the fixed vectors
    D0 = M.zeros(k, a)
    for i in range(k2):
        D0[cf + i, af + i] = 1
        D0[cf + k2 + i, af + k1 + i] = 1
    for j in range(cf):
        if j < af:
            D0[j, j] = 1
        elif k2 + j - af < k1:
            D0[j, af + k2 + j - af] = 1
        else:
            raise WitnessFailed("no surjective intertwiner between the diagonal blocks")
    D = M.mul_chain(F, cc.P, D0, M.inverse(F, ca.P))
    s = M.identity(n)
    s[a:, :a] = D
    return s


def _normal_pairs(F: Field, e):
    rows, cols = e.shape
    if rows == 0 or cols == 0:
        return M.identity(rows), M.identity(cols), 0
    return M.rank_normal_form(F, e)


def _lower_path_odd(spec: ClassSpec, x) -> PathCertificate:
    F, n, k = spec.field, spec.n, spec.k
    a = n - k
    t = canonical_t(spec)
    ca = M.canonicalize_involution(F, x[:a, :a])
    cc = M.canonicalize_involution(F, x[a:, a:])
    ap, am = a - ca.k, ca.k
    cp, cm = k - cc.k, cc.k
    h0 = M.block_diag(ca.P, cc.P)
    y = M.conjugate(F, M.inverse(F, h0), x, h0)
    E = y[a:, :a]
    # y^2 = I leaves E supported on (C+, A-) and (C-, A+) only
    P1, Q1, l1 = _normal_pairs(F, E[:cp, ap:])
    P2, Q2, l2 = _normal_pairs(F, E[cp:, :ap])
    h = M.matmul(F, h0, M.block_diag(Q2, Q1, M.inverse(F, P1), M.inverse(F, P2)))
    h_inv = M.inverse(F, h)
    y = M.mul_chain(F, h_inv, x, h)
    pairs = [(a + i, ap + i) for i in range(l1)] + [(a + cp + i, i) for i in range(l2)]
    tdiag = [1] * a + [-1] * k
    for minus in itertools.combinations(range(n), k):
        signs = [1] * n
        for i in minus:
            signs[i] = -1
        if signs == tdiag or any(signs[c] != signs[r] for c, r in pairs):
            continue
        z = np.diag([F.from_int(v) for v in signs]).astype(np.int64)
        return _certificate(spec, [t, M.conjugate(F, h, z, h_inv), x])
    # every coordinate is paired: n = 2k with k odd
    if len(pairs) < 2:
        raise Unsupported("GL_2 has no path between these involutions")
    w = M.identity(n)
    minus_one = F.from_int(-1)
    for j, (c, r) in enumerate(pairs):
        if j == 0:
            w[c, c] = w[r, r] = minus_one
        elif j > 1:
            w[c, c], w[r, r], w[c, r] = y[c, c], y[r, r], y[c, r]
    inner = path_lower_triangular(w, spec)
    chain = [M.conjugate(F, h, m, h_inv) for m in inner.members] + [x]
    return _certificate(spec, chain, note="three-step path through an involution with free coordinates")


def two_step_path(x, spec: ClassSpec) -> PathCertificate:
    """Path of length <= 2 from t to any x when n >= 4k or n >= 4(n-k) (odd characteristic)."""
    F, n, k = spec.field, spec.n, spec.k
    if F.char == 2:
        raise BranchUnavailable("odd characteristic only")
    x = np.asarray(x, dtype=np.int64)
    if class_of(x, F) != k:
        raise NotInClass("x is not in the class")
    if n < 4 * k:
        if n < 4 * (n - k):
            raise BranchUnavailable(f"need n >= 4k or n >= 4(n-k) (n={n}, k={k})")
        # x -> -x identifies X_k with X_{n-k}
        mirror = ClassSpec(n, n - k, F)
        s = _sign_swap(F, n, n - k)
        s_inv = M.inverse(F, s)
        inner = two_step_path(M.conjugate(F, s, M.neg(F, x), s_inv), mirror)
        return _certificate(spec, [M.neg(F, M.conjugate(F, s_inv, m, s)) for m in inner.members])
    t = canonical_t(spec)
    if np.array_equal(x, t) or adjacent(t, x, F):
        return _certificate(spec, [t, x])
    d = decompose_general(spec, x)
    h, m = d.h, d.m
    if h[: n - k, n - k :].any():
        raise WitnessFailed("decomposition conjugator is not block lower triangular")
    H21, H22 = h[n - k :, : n - k], h[n - k :, n - k :]
    Q1 = M.matmul(F, M.inverse(F, H22), H21)[:, : n - 2 * k + m]
    size = n - 2 * k + m
    null = M.nullspace(F, Q1)
    P = M.complete_basis(F, null[:, :k], size)
    C = M.conjugate(F, P, M.block_diag(M.neg(F, M.identity(k)), M.identity(size - k)))
    z = M.block_diag(C, M.identity(n - size))
    return _certificate(spec, [t, M.conjugate(F, h, z), x])


def transpose_chain(k: int, F: Field) -> tuple:
    """The involutions M and z of the length-4 path t - s - z - M - t^T (characteristic 2, n = 2k, k odd)."""
    if F.char != 2 or k % 2 == 0 or k < 3:
        raise BranchUnavailable("characteristic 2 with odd k >= 3 only")
    r = (k - 1) // 2
    jt = M.identity(k)  # transpose of the unipotent form with its block in the leading columns
    for i in range(r):
        jt[i, k - r + i] = 1
    mid = M.block_compose([[jt, M.e_unit(k, r, r)], [M.zeros(k, k), jt]])
    low = M.identity(k)
    low[k - 1, r] = 1
    for i in range(r - 1):
        low[i, r + 1 + i] = 1
    z = M.block_compose([[jt, M.zeros(k, k)], [M.e_unit(k, r - 1, r), low]])
    return mid, z


def four_step_path_to_transpose(k: int, F: Field) -> PathCertificate:
    """Validated path t - s - z - M - t^T of length 4 in X_k of GL_2k (characteristic 2, k odd)."""
    spec = ClassSpec(2 * k, k, F)
    t = canonical_t(spec)
    mid, z = transpose_chain(k, F)
    head = path_lower_triangular(z, spec)
    cert = _certificate(spec, list(head.members) + [mid, t.T.copy()])
    if cert.length != 4:
        raise WitnessFailed(f"expected a length-4 path, got {cert.length}")
    return cert


def transpose_distance_report(k: int, F: Field) -> WitnessReport:
    """d(t, t^T) = 4: exhaustive lower bound plus an explicit path."""
    report = transpose_lower_bound(k, F)
    t0 = time.perf_counter()
    cert = four_step_path_to_transpose(k, F)
    mid, z = transpose_chain(k, F)
    report.bound = "= 4"
    report.method += " + length-4 certificate"
    report.certificate = cert
    report.matrices.update({"M": mid, "z": z})
    report.runtime_ms += (time.perf_counter() - t0) * 1000
    return report


def far_involution(spec: ClassSpec) -> np.ndarray:
    if spec.char == 2:
        return far_involution_char2(spec.n, spec.k, spec.field)
    return far_involution_odd(spec.n, spec.k, spec.field)


def validate_spec_for_paths(spec: ClassSpec):
    if spec.n < 3:
        raise InvalidClass("paths need n >= 3")
