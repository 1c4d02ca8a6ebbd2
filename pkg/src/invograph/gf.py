"""Finite fields GF(p^e) for small q.

Elements are plain integers in ``range(q)``: the coefficient vector
``(c0, ..., c_{e-1})`` of a residue polynomial is read as base-p digits,
constant term least significant. All arithmetic goes through precomputed
``q x q`` tables so that it vectorizes over numpy index arrays.
"""
from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .errors import DegreeMismatch, FieldTooLarge, NotPrime, ReduciblePolynomial, ZeroInverse

DEFAULT_MAX_Q = 16


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


def _poly_mulmod(a, b, modulus, p):
    """Multiply coefficient lists a, b (constant first) modulo a monic modulus."""
    e = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for d in range(len(prod) - 1, e - 1, -1):
        c = prod[d]
        if c:
            for i in range(e + 1):
                prod[d - e + i] = (prod[d - e + i] - c * modulus[i]) % p
    out = prod[:e] + [0] * max(0, e - len(prod))
    return out[:e]


def _poly_rem(num, den, p):
    num = list(num)
    dn = len(den) - 1
    inv_lead = pow(den[-1], p - 2, p)
    for d in range(len(num) - 1, dn - 1, -1):
        c = num[d] * inv_lead % p
        if c:
            for i in range(dn + 1):
                num[d - dn + i] = (num[d - dn + i] - c * den[i]) % p
    return num[:dn]


def is_irreducible(poly, p: int) -> bool:
    """Exhaustive check: no monic factor of degree 1..deg/2 divides poly."""
    e = len(poly) - 1
    if e <= 1:
        return e == 1
    for d in range(1, e // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not any(_poly_rem(poly, list(low) + [1], p)):
                return False
    return True


class Field:
    """GF(p^e) defined by a monic irreducible ``poly`` (constant term first)."""

    def __init__(self, p: int, e: int, poly):
        self.p = p
        self.e = e
        self.poly = tuple(int(c) for c in poly)
        self.q = p**e

    def __repr__(self):
        return f"Field(p={self.p}, e={self.e}, poly={list(self.poly)})"

    def __eq__(self, other):
        return isinstance(other, Field) and (self.p, self.e, self.poly) == (other.p, other.e, other.poly)

    def __hash__(self):
        return hash((self.p, self.e, self.poly))

    @property
    def char(self) -> int:
        return self.p

    @property
    def is_prime(self) -> bool:
        return self.e == 1

    def coeffs(self, a: int) -> tuple:
        out = []
        for _ in range(self.e):
            a, r = divmod(int(a), self.p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, coeffs) -> int:
        if len(coeffs) != self.e:
            raise DegreeMismatch(f"expected {self.e} coefficients, got {len(coeffs)}")
        return sum(int(c) % self.p * self.p**i for i, c in enumerate(coeffs))

    def elements(self) -> list:
        """All q elements in canonical order, zero first."""
        return list(range(self.q))

    @cached_property
    def add_table(self) -> np.ndarray:
        digits = np.array([self.coeffs(a) for a in range(self.q)], dtype=np.int64).reshape(self.q, self.e)
        s = (digits[:, None, :] + digits[None, :, :]) % self.p
        return (s * self.p ** np.arange(self.e)).sum(-1)

    @cached_property
    def mul_table(self) -> np.ndarray:
        if self.is_prime:
            r = np.arange(self.q)
            return np.outer(r, r) % self.p
        tab = np.zeros((self.q, self.q), dtype=np.int64)
        cs = [list(self.coeffs(a)) for a in range(self.q)]
        for a in range(self.q):
            for b in range(a, self.q):
                v = self.from_coeffs(_poly_mulmod(cs[a], cs[b], self.poly, self.p))
                tab[a, b] = tab[b, a] = v
        return tab

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([int(np.flatnonzero(self.add_table[a] == 0)[0]) for a in range(self.q)])

    @cached_property
    def sub_table(self) -> np.ndarray:
        return self.add_table[:, self.neg_table]

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            inv[a] = int(np.flatnonzero(self.mul_table[a] == 1)[0])
        return inv

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.sub_table[a, b]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def neg(self, a):
        return self.neg_table[a]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroInverse("0 has no multiplicative inverse")
        return self.inv_table[a]

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F (e.g. -1, 2)."""
        return int(n) % self.p

    @cached_property
    def primitive_element(self) -> int:
        """Smallest element generating the multiplicative group."""
        for a in range(1, self.q):
            x, order = a, 1
            while x != 1:
                x = int(self.mul_table[x, a])
                order += 1
            if order == self.q - 1:
                return a
        raise AssertionError("no primitive element")

    def header(self) -> str:
        return " ".join(str(v) for v in (self.p, self.e, *self.poly))

    @classmethod
    def from_header(cls, line: str, max_q: int | None = None) -> "Field":
        vals = [int(v) for v in line.split()]
        if len(vals) < 3:
            raise DegreeMismatch(f"bad field header: {line!r}")
        p, e, poly = vals[0], vals[1], vals[2:]
        return make_field(p, e, poly, max_q=max_q)


def make_field(p: int, e: int = 1, poly=None, max_q: int | None = None) -> Field:
    """Build and validate GF(p^e); searches the lexicographically first irreducible poly if none given."""
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if e < 1:
        raise DegreeMismatch("extension degree must be >= 1")
    limit = DEFAULT_MAX_Q if max_q is None else max_q
    if p**e > limit:
        raise FieldTooLarge(f"q = {p**e} exceeds the configured limit {limit}")
    if poly is None:
        if e == 1:
            poly = (0, 1)
        else:
            for low in itertools.product(range(p), repeat=e):
                cand = list(low) + [1]
                if is_irreducible(cand, p):
                    poly = cand
                    break
    poly = [int(c) % p for c in poly]
    if len(poly) != e + 1 or poly[-1] != 1:
        raise DegreeMismatch(f"poly must be monic of degree {e}: {poly}")
    if e > 1 and not is_irreducible(poly, p):
        raise ReduciblePolynomial(f"{poly} factors over F_{p}")
    return Field(p, e, poly)


def irreducible_polys(F: Field, degree: int):
    """Monic irreducible polynomials of the given degree over F (coefficients in F, constant first)."""
    for low in itertools.product(range(F.q), repeat=degree):
        cand = list(low) + [1]
        if _is_irreducible_over(F, cand):
            yield cand


def _is_irreducible_over(F: Field, poly) -> bool:
    deg = len(poly) - 1
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(F.q), repeat=d):
            if _divides_over(F, list(low) + [1], poly):
                return False
    return True


def _divides_over(F: Field, den, num) -> bool:
    num = list(num)
    dn = len(den) - 1
    for d in range(len(num) - 1, dn - 1, -1):
        c = num[d]
        if c:
            for i in range(dn + 1):
                num[d - dn + i] = int(F.sub(num[d - dn + i], F.mul(c, den[i])))
    return not any(num[:dn])
