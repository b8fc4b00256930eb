"""Exact arithmetic in GF(2^e), in R_n = F_q[t]/(t^n) and in SL_2(R_n).

Field elements are plain ints in ``range(q)``: bit ``i`` is the coefficient of
``x^i`` modulo the fixed irreducible polynomial ``IRREDUCIBLE[e]``.  Truncated
polynomials store their coefficients lowest degree first, so truncation to a
smaller modulus is a prefix keep.

Serialization (bit-exact, see README):

* ``TruncPoly``: ``"<n>:<h_0>,<h_1>,...,<h_{n-1}>"`` with ``n`` in decimal and
  each coefficient in lowercase hex, lowest degree first.
* ``Mat2``: the four entries ``a;b;c;d`` of ``[[a, b], [c, d]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

# Lexicographically least irreducible polynomial of each degree over F_2.
IRREDUCIBLE = {
    1: 0b10,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
}


class AlgebraError(ValueError):
    """Raised on modulus mismatch, non-unit inversion or a non-SL_2 matrix."""


def clmul(x: int, y: int) -> int:
    """Carry-less product of two bit-vectors."""
    r = 0
    while y:
        if y & 1:
            r ^= x
        x <<= 1
        y >>= 1
    return r


def poly_mod(x: int, m: int) -> int:
    dm = m.bit_length() - 1
    while x and x.bit_length() - 1 >= dm:
        x ^= m << (x.bit_length() - 1 - dm)
    return x


def is_irreducible(m: int) -> bool:
    """Trial division over F_2; fine for the small degrees used here."""
    d = m.bit_length() - 1
    if d < 1:
        return False
    for f in range(2, 1 << (d // 2 + 1)):
        if f.bit_length() - 1 > d // 2:
            break
        if poly_mod(m, f) == 0:
            return False
    return True


class GF2m:
    """The field with ``q = 2^e`` elements, backed by full multiplication tables."""

    def __init__(self, e: int):
        if e not in IRREDUCIBLE:
            raise AlgebraError(f"unsupported extension degree {e}")
        self.e = e
        self.q = 1 << e
        self.modulus = IRREDUCIBLE[e]
        q = self.q
        self.mul_table = [[poly_mod(clmul(x, y), self.modulus) for y in range(q)] for x in range(q)]
        self.inv_table = [0] * q
        for x in range(1, q):
            for y in range(1, q):
                if self.mul_table[x][y] == 1:
                    self.inv_table[x] = y
                    break

    def mul(self, x: int, y: int) -> int:
        return self.mul_table[x][y]

    def inv(self, x: int) -> int:
        if x == 0:
            raise AlgebraError("zero has no inverse")
        return self.inv_table[x]

    def __repr__(self):
        return f"GF2m(q={self.q})"


@lru_cache(maxsize=None)
def field(q: int) -> GF2m:
    e = q.bit_length() - 1
    if q < 2 or q != 1 << e:
        raise AlgebraError(f"q={q} is not a power of two")
    return GF2m(e)


@dataclass(frozen=True)
class TruncPoly:
    """An element of F_q[t]/(t^n); ``coeffs[i]`` is the coefficient of t^i."""

    q: int
    coeffs: tuple

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, q: int, n: int) -> "TruncPoly":
        return cls(q, (0,) * n)

    @classmethod
    def one(cls, q: int, n: int) -> "TruncPoly":
        return cls.monomial(q, n, 0)

    @classmethod
    def monomial(cls, q: int, n: int, k: int, c: int = 1) -> "TruncPoly":
        cs = [0] * n
        if k < n:
            cs[k] = c
        return cls(q, tuple(cs))

    @classmethod
    def from_coeffs(cls, q: int, n: int, coeffs: Sequence[int]) -> "TruncPoly":
        cs = list(coeffs[:n]) + [0] * max(0, n - len(coeffs))
        if any(not 0 <= c < q for c in cs):
            raise AlgebraError("coefficient outside the field")
        return cls(q, tuple(cs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int:
        """Index of the first nonzero coefficient (``n`` for zero)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return self.n

    def truncate(self, m: int) -> "TruncPoly":
        if m > self.n:
            raise AlgebraError("cannot truncate to a larger modulus")
        return TruncPoly(self.q, self.coeffs[:m])

    def shift(self, k: int) -> "TruncPoly":
        """Multiply by t^k."""
        n = self.n
        return TruncPoly(self.q, ((0,) * k + self.coeffs)[:n] if k < n else (0,) * n)

    def __add__(self, other: "TruncPoly") -> "TruncPoly":
        return tp_add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "TruncPoly") -> "TruncPoly":
        return tp_mul(self, other)

    def __str__(self):
        return tp_to_str(self)


def _check(x: TruncPoly, y: TruncPoly) -> None:
    if x.n != y.n or x.q != y.q:
        raise AlgebraError(f"modulus mismatch: (q={x.q}, n={x.n}) vs (q={y.q}, n={y.n})")


def tp_add(x: TruncPoly, y: TruncPoly) -> TruncPoly:
    _check(x, y)
    return TruncPoly(x.q, tuple(a ^ b for a, b in zip(x.coeffs, y.coeffs)))


def _conv(xc: tuple, yc: tuple, mt) -> list:
    """Truncated convolution of coefficient tuples of equal length."""
    n = len(xc)
    out = [0] * n
    for i, xi in enumerate(xc):
        if xi:
            row = mt[xi]
            for j in range(n - i):
                yj = yc[j]
                if yj:
                    out[i + j] ^= row[yj]
    return out


def _tp(q: int, coeffs) -> TruncPoly:
    """Unchecked constructor for internal hot paths."""
    t = object.__new__(TruncPoly)
    object.__setattr__(t, "q", q)
    object.__setattr__(t, "coeffs", tuple(coeffs))
    return t


def tp_mul(x: TruncPoly, y: TruncPoly) -> TruncPoly:
    _check(x, y)
    return _tp(x.q, _conv(x.coeffs, y.coeffs, field(x.q).mul_table))


def tp_inv(x: TruncPoly) -> TruncPoly:
    """Inverse of a unit by the power-series recurrence b_k = c_0^{-1} sum x_i b_{k-i}."""
    if not x.coeffs or x.coeffs[0] == 0:
        raise AlgebraError("non-unit has no inverse")
    F = field(x.q)
    mt = F.mul_table
    c0inv = F.inv(x.coeffs[0])
    n = x.n
    b = [0] * n
    b[0] = c0inv
    xc = x.coeffs
    for k in range(1, n):
        s = 0
        for i in range(1, k + 1):
            if xc[i] and b[k - i]:
                s ^= mt[xc[i]][b[k - i]]
        b[k] = mt[c0inv][s]
    return TruncPoly(x.q, tuple(b))


def tp_to_str(x: TruncPoly) -> str:
    return f"{x.n}:" + ",".join(format(c, "x") for c in x.coeffs)


def tp_from_str(s: str, q: int) -> TruncPoly:
    try:
        head, _, body = s.strip().partition(":")
        n = int(head)
        cs = [int(h, 16) for h in body.split(",")] if body else []
    except ValueError as exc:
        raise AlgebraError(f"malformed truncated polynomial {s!r}") from exc
    if len(cs) != n:
        raise AlgebraError(f"expected {n} coefficients in {s!r}, got {len(cs)}")
    return TruncPoly.from_coeffs(q, n, cs)


@dataclass(frozen=True)
class Mat2:
    """The 2x2 matrix [[a, b], [c, d]] over F_q[t]/(t^n)."""

    a: TruncPoly
    b: TruncPoly
    c: TruncPoly
    d: TruncPoly

    def __post_init__(self):
        a = self.a
        for x in (self.b, self.c, self.d):
            _check(a, x)

    @property
    def q(self) -> int:
        return self.a.q

    @property
    def n(self) -> int:
        return self.a.n

    @classmethod
    def identity(cls, q: int, n: int) -> "Mat2":
        one, zero = TruncPoly.one(q, n), TruncPoly.zero(q, n)
        return cls(one, zero, zero, one)

    @classmethod
    def from_lists(cls, q: int, n: int, a, b, c, d) -> "Mat2":
        return cls(*(TruncPoly.from_coeffs(q, n, x) for x in (a, b, c, d)))

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def truncate(self, m: int) -> "Mat2":
        return Mat2(*(x.truncate(m) for x in self.entries()))

    def __mul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def __str__(self):
        return mat_to_str(self)


def det(g: Mat2) -> TruncPoly:
    # characteristic 2: ad - bc = ad + bc
    return tp_mul(g.a, g.d) + tp_mul(g.b, g.c)


def is_sl2(g: Mat2) -> bool:
    return det(g) == TruncPoly.one(g.q, g.n)


def mat_mul(g: Mat2, h: Mat2) -> Mat2:
    _check(g.a, h.a)
    q = g.a.q
    mt = field(q).mul_table
    ga, gb, gc, gd = g.a.coeffs, g.b.coeffs, g.c.coeffs, g.d.coeffs
    ha, hb, hc, hd = h.a.coeffs, h.b.coeffs, h.c.coeffs, h.d.coeffs

    def ent(x1, y1, x2, y2):
        return _tp(q, [u ^ v for u, v in zip(_conv(x1, y1, mt), _conv(x2, y2, mt))])

    m = object.__new__(Mat2)
    object.__setattr__(m, "a", ent(ga, ha, gb, hc))
    object.__setattr__(m, "b", ent(ga, hb, gb, hd))
    object.__setattr__(m, "c", ent(gc, ha, gd, hc))
    object.__setattr__(m, "d", ent(gc, hb, gd, hd))
    return m


def mat_inv(g: Mat2) -> Mat2:
    """Adjugate inverse, valid on SL_2 (signs vanish in characteristic 2)."""
    if not is_sl2(g):
        raise AlgebraError("matrix is not in SL_2")
    return Mat2(g.d, g.b, g.c, g.a)


def mat_pow(g: Mat2, k: int) -> Mat2:
    r = Mat2.identity(g.q, g.n)
    base = g
    while k:
        if k & 1:
            r = mat_mul(r, base)
        base = mat_mul(base, base)
        k >>= 1
    return r


def commutator(g: Mat2, h: Mat2) -> Mat2:
    """[g, h] = g^-1 h^-1 g h."""
    return mat_mul(mat_mul(mat_inv(g), mat_inv(h)), mat_mul(g, h))


def val(g: Mat2) -> int:
    """Largest m <= n with g = I mod t^m; the identity maps to n."""
    if not is_sl2(g):
        raise AlgebraError("matrix is not in SL_2")
    return min(
        (g.a + TruncPoly.one(g.q, g.n)).valuation(),
        g.b.valuation(),
        g.c.valuation(),
        (g.d + TruncPoly.one(g.q, g.n)).valuation(),
    )


def mat_to_str(g: Mat2) -> str:
    return ";".join(tp_to_str(x) for x in g.entries())


def mat_from_str(s: str, q: int) -> Mat2:
    parts = s.strip().split(";")
    if len(parts) != 4:
        raise AlgebraError(f"expected four entries in {s!r}")
    return Mat2(*(tp_from_str(p, q) for p in parts))
