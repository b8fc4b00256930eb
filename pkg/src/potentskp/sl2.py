"""SL_2 over F_q[[t]] (q even) with the congruence filtration and the square-approximation oracle.

Level schedule: N_n = K_{beta_n}, M_n = K_{alpha_n}, A_n = 3, k_n = 2, where K_m
is the kernel of reduction mod t^m.  Every element of K_{3m} agrees mod
t^{4m} with a product of three squares of explicit elements of K_m.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import (AlgebraError, Mat2, TruncPoly, field, mat_from_str, mat_inv, mat_mul,
                      mat_pow, mat_to_str, tp_inv)
from .engine import BaseCaseError, Instance, OracleError, Word, concat
from .groups import FiniteQuotient


class ScheduleError(ValueError):
    """A level schedule violates one of the conditions the recursion needs."""


def level(g: Mat2) -> int:
    """Congruence level without the determinant check (callers guarantee SL_2)."""
    one = TruncPoly.one(g.q, g.n)
    return min((g.a + one).valuation(), g.b.valuation(), g.c.valuation(), (g.d + one).valuation())


def _poly(q: int, n: int, coeffs) -> TruncPoly:
    if isinstance(coeffs, TruncPoly):
        if coeffs.n != n:
            coeffs = TruncPoly.from_coeffs(q, n, coeffs.coeffs)
        return coeffs
    if isinstance(coeffs, int):
        coeffs = [coeffs]
    return TruncPoly.from_coeffs(q, n, list(coeffs))


def gen_D(n: int, alpha, q: int, depth: int) -> Mat2:
    """[[1 + t^{2n} alpha, t^n], [t^n alpha, 1]]."""
    if 2 * n >= depth:
        raise AlgebraError(f"level {n} too deep for modulus t^{depth}")
    al = _poly(q, depth, alpha)
    one = TruncPoly.one(q, depth)
    tn = TruncPoly.monomial(q, depth, n)
    return Mat2(one + al.shift(2 * n), tn, al.shift(n), one)


def gen_E(n: int, alpha, q: int, depth: int) -> Mat2:
    """[[1 + t^n, t^n alpha], [0, (1 + t^n)^{-1}]]."""
    if n >= depth:
        raise AlgebraError(f"level {n} too deep for modulus t^{depth}")
    al = _poly(q, depth, alpha)
    u = TruncPoly.one(q, depth) + TruncPoly.monomial(q, depth, n)
    return Mat2(u, al.shift(n), TruncPoly.zero(q, depth), tp_inv(u))


def gen_F(n: int, alpha, q: int, depth: int) -> Mat2:
    """[[(1 + t^n)^{-1}, 0], [t^n alpha, 1 + t^n]]."""
    if n >= depth:
        raise AlgebraError(f"level {n} too deep for modulus t^{depth}")
    al = _poly(q, depth, alpha)
    u = TruncPoly.one(q, depth) + TruncPoly.monomial(q, depth, n)
    return Mat2(tp_inv(u), TruncPoly.zero(q, depth), al.shift(n), u)


def square_residue(z: Mat2, n: int) -> tuple:
    """Coefficients 3n..4n-1 of the entries a-1, b, c of z: the data the oracle reads."""
    lo, hi = 3 * n, min(4 * n, z.n)
    one = TruncPoly.one(z.q, z.n)
    return tuple(tuple(x.coeffs[lo:hi]) for x in (z.a + one, z.b, z.c))


def square_approx(z: Mat2, n: int) -> tuple[Mat2, Mat2, Mat2]:
    """(y1, y2, y3) in K_n with y1^2 y2^2 y3^2 = z mod t^{min(4n, depth)}; needs z in K_{3n}."""
    if n < 1:
        raise AlgebraError("level must be positive")
    if level(z) < 3 * n:
        raise AlgebraError(f"square approximation needs z in K_{3 * n}, got level {level(z)}")
    q, m = z.q, z.n
    a, b, c = square_residue(z, n)
    y1 = gen_D(n, TruncPoly.from_coeffs(q, m, a).shift(n), q, m)
    y2 = gen_E(n, TruncPoly.from_coeffs(q, m, b), q, m)
    y3 = gen_F(n, TruncPoly.from_coeffs(q, m, c), q, m)
    return y1, y2, y3


# -- schedules ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class Sl2Schedule:
    q: int
    depth: int
    alphas: tuple
    betas: tuple

    def __post_init__(self):
        check_schedule(self)

    @property
    def steps(self) -> int:
        return len(self.betas)

    def to_json(self) -> str:
        d = asdict(self)
        d["alphas"], d["betas"] = list(self.alphas), list(self.betas)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "Sl2Schedule":
        d = json.loads(s)
        try:
            return cls(int(d["q"]), int(d["depth"]), tuple(d["alphas"]), tuple(d["betas"]))
        except KeyError as exc:
            raise ScheduleError(f"schedule record missing {exc}") from None


def check_schedule(s: Sl2Schedule) -> None:
    field(s.q)
    al, be = s.alphas, s.betas
    if len(al) != len(be) or not be:
        raise ScheduleError("alphas and betas must be non-empty and of equal length")
    if any(a < 1 for a in al):
        raise ScheduleError("alpha levels must be positive")
    if s.depth < be[-1]:
        raise ScheduleError("depth must reach the last beta")
    for n in range(len(be)):
        if be[n] < 3 * al[n]:
            raise ScheduleError(f"beta_{n + 1} < 3 alpha_{n + 1}")
    for n in range(len(be) - 1):
        b0, b1 = be[n], be[n + 1]
        if b1 <= b0 or al[n + 1] < al[n]:
            raise ScheduleError(f"schedule not increasing at step {n + 1}")
        if b1 > al[n] + b0:
            raise ScheduleError(f"beta_{n + 2} > alpha_{n + 1} + beta_{n + 1}")
        if b1 > 2 * b0:
            raise ScheduleError(f"beta_{n + 2} > 2 beta_{n + 1}")
        if b1 > 4 * al[n]:
            raise ScheduleError(f"beta_{n + 2} > 4 alpha_{n + 1}: squares cannot reach it")


def make_schedule(q: int, beta1: int, steps: int) -> Sl2Schedule:
    """beta' = min(4 floor(beta/3), beta + floor(beta/3)), alpha = floor(beta/3)."""
    if steps < 1:
        raise ScheduleError("need at least one step")
    if beta1 < 3:
        raise ScheduleError("beta_1 must be at least 3")
    betas = [beta1]
    for _ in range(steps - 1):
        b = betas[-1]
        nb = min(4 * (b // 3), b + b // 3)
        if nb <= b:
            raise ScheduleError(f"schedule stalls at beta = {b}")
        betas.append(nb)
    return Sl2Schedule(q, betas[-1], tuple(b // 3 for b in betas), tuple(betas))


def parse_schedule(text: str, q: int, depth: int | None = None) -> Sl2Schedule:
    """``auto:<beta1>`` (grown until the depth is reached) or a JSON schedule file."""
    if text.startswith("auto:"):
        beta1 = int(text[5:])
        if depth is None:
            return make_schedule(q, beta1, 2)
        steps = 1
        while make_schedule(q, beta1, steps).betas[-1] < depth:
            steps += 1
        s = make_schedule(q, beta1, steps)
        if s.betas[-1] != depth:
            raise ScheduleError(f"depth {depth} is not a schedule level; levels are {list(s.betas)}")
        return s
    s = Sl2Schedule.from_json(Path(text).read_text())
    if s.q != q:
        raise ScheduleError(f"schedule is for q={s.q}, not q={q}")
    return s


# -- the quotient group -------------------------------------------------------------------------


def sl2_order(q: int, m: int) -> int:
    return (q * q - 1) * q ** (3 * m - 2)


class Sl2Quotient(FiniteQuotient):
    """SL_2(F_q[t]/(t^m))."""

    def __init__(self, q: int, m: int):
        field(q)
        self.q, self.m = q, m
        self.order = sl2_order(q, m)
        self.name = f"SL2(F{q}[t]/t^{m})"

    def identity(self):
        return Mat2.identity(self.q, self.m)

    def mul(self, g, h):
        return mat_mul(g, h)

    def inv(self, g):
        return Mat2(g.d, g.b, g.c, g.a)

    def power(self, g, k):
        return mat_pow(g, k)

    def key(self, g):
        return (g.a.coeffs, g.b.coeffs, g.c.coeffs, g.d.coeffs)

    def serialize(self, g) -> str:
        return mat_to_str(g)

    def parse(self, s: str):
        g = mat_from_str(s, self.q)
        if g.n != self.m:
            raise AlgebraError(f"expected modulus t^{self.m}, got t^{g.n}")
        mat_inv(g)  # determinant check
        return g

    def describe(self) -> str:
        return f"sl2:q={self.q}:m={self.m}"


def elementary(q: int, m: int, upper: bool, coeffs) -> Mat2:
    one, zero = TruncPoly.one(q, m), TruncPoly.zero(q, m)
    p = _poly(q, m, coeffs)
    return Mat2(one, p, zero, one) if upper else Mat2(one, zero, p, one)


def canonical_generators(q: int, m: int) -> list[Mat2]:
    """x(1), y(1), [x(w), y(w) when q > 2], x(t), y(t), h(1 + t).

    x(f) = [[1, f], [0, 1]], y(f) = [[1, 0], [f, 1]], h(u) = diag(u, u^-1) and
    w is the class of x in F_q.  The elementary matrices alone generate only
    a proper subgroup mod t^3; the diagonal element closes the gap.
    """
    thetas = [[1]]
    if q > 2:
        thetas.append([2])
    gens = []
    for th in thetas:
        gens += [elementary(q, m, True, th), elementary(q, m, False, th)]
    if m > 1:
        gens += [elementary(q, m, True, [0, 1]), elementary(q, m, False, [0, 1])]
        u = TruncPoly.from_coeffs(q, m, [1, 1])
        zero = TruncPoly.zero(q, m)
        gens.append(Mat2(u, zero, zero, tp_inv(u)))
    return gens


def random_element(q: int, m: int, rng, min_level: int = 0) -> Mat2:
    """Uniform element of K_{min_level} / K_m (the whole group when min_level = 0)."""
    def rand_poly(lo):
        cs = [0] * m
        for i in range(lo, m):
            cs[i] = int(rng.integers(q))
        return TruncPoly(q, tuple(cs))

    one = TruncPoly.one(q, m)
    if min_level > 0:
        a = one + rand_poly(min_level)
        b, c = rand_poly(min_level), rand_poly(min_level)
        return Mat2(a, b, c, tp_inv(a) * (one + b * c))
    while True:
        a, b = rand_poly(0), rand_poly(0)
        if a.coeffs[0]:
            c = rand_poly(0)
            return Mat2(a, b, c, tp_inv(a) * (one + b * c))
        if b.coeffs[0]:
            d = rand_poly(0)
            return Mat2(a, b, tp_inv(b) * (a * d + one), d)


def residue_representatives(q: int, m: int, lo: int, hi: int) -> list[Mat2]:
    """One element for each class of K_lo / K_hi, in lexicographic order of (a, b, c) digits."""
    one = TruncPoly.one(q, m)
    width = hi - lo
    reps = []
    for digits in product(range(q), repeat=3 * width):
        polys = [TruncPoly.from_coeffs(q, m, [0] * lo + list(digits[i * width:(i + 1) * width]))
                 for i in range(3)]
        a = one + polys[0]
        b, c = polys[1], polys[2]
        reps.append(Mat2(a, b, c, tp_inv(a) * (one + b * c)))
    return reps


# -- the instance -------------------------------------------------------------------------------


class Sl2Instance(Instance):
    """The congruence filtration of SL_2(F_q[[t]]) along a schedule."""

    def __init__(self, schedule: Sl2Schedule):
        self.schedule = schedule
        self.q = schedule.q
        self.group = Sl2Quotient(schedule.q, schedule.depth)
        self.top_level = schedule.steps
        self.name = f"sl2:q={schedule.q}:depth={schedule.depth}"

    def A(self, n):
        return 3

    def k(self, n):
        return 2

    def beta(self, n):
        return self.schedule.betas[n - 1]

    def alpha(self, n):
        return self.schedule.alphas[n - 1]

    def in_N(self, z, n):
        return level(z) >= self.beta(n)

    def in_M(self, y, n):
        return level(y) >= self.alpha(n)

    def power_approx(self, z, n):
        if level(z) < self.beta(n):
            raise OracleError(f"input outside N_{n}")
        if n < self.top_level and level(z) >= self.beta(n + 1):
            e = self.group.identity()
            return [e, e, e]
        return list(square_approx(z, self.alpha(n)))

    def residue_exponents(self, z, n):
        return ["".join(format(c, "x") for c in cs) for cs in square_residue(z, self.alpha(n))]

    def base_quotient(self):
        return Sl2Quotient(self.q, self.beta(1))

    def to_base(self, g):
        return g.truncate(self.beta(1))

    def index_N1(self):
        return sl2_order(self.q, self.beta(1))

    def class_key(self, g, n):
        b = self.beta(n)
        return (g.a.coeffs[:b], g.b.coeffs[:b], g.c.coeffs[:b], g.d.coeffs[:b])

    def sample_N(self, n, rng):
        lvl = self.beta(n) if n <= self.top_level else self.group.m
        return random_element(self.q, self.group.m, rng, min_level=lvl)

    def sample_M(self, n, rng):
        return random_element(self.q, self.group.m, rng, min_level=self.alpha(n))

    def residue_classes(self, n):
        return residue_representatives(self.q, self.group.m, self.beta(n), self.beta(n + 1))

    def describe(self):
        s = self.schedule
        return {"name": self.name, "q": s.q, "depth": s.depth, "alphas": list(s.alphas), "betas": list(s.betas)}


# -- bit-packed meet in the middle for q = 2 ----------------------------------------------------


def _pack(g: Mat2) -> tuple[int, int, int, int]:
    return tuple(sum(c << i for i, c in enumerate(x.coeffs)) for x in g.entries())


def _clmul_const(x: np.ndarray, y: int, mask: int) -> np.ndarray:
    r = np.zeros_like(x)
    j = 0
    while y:
        if y & 1:
            r ^= x << np.uint64(j)
        y >>= 1
        j += 1
    return r & np.uint64(mask)


class PackedMitmBase:
    """Meet-in-the-middle base words for SL_2(F_2[t]/t^m), m <= 16, with numpy bit-packed matrices.

    Each entry is a uint64 bit mask (bit i = coefficient of t^i) and a matrix
    packs into one 64-bit key.  The radius-L ball is built level by level with
    the same tie-breaking as :class:`DirectedBallTable`; a query h scans
    u^-1 h over the whole ball and looks the results up in the sorted keys,
    returning the match of least total length (first u on ties).
    """

    name = "mitm"

    def __init__(self, gens: Sequence[Mat2], m: int, L: int | None = None, target: int = 400_000,
                 max_size: int = 10**7):
        if gens[0].q != 2:
            raise ValueError("packed search supports q = 2 only")
        if not 1 <= m <= 16:
            raise ValueError("packed search supports 1 <= m <= 16")
        self.m = m
        self.mask = (1 << m) - 1
        self.gens = [_pack(g.truncate(m)) for g in gens]
        A = np.array([1], dtype=np.uint64)
        Z = np.array([0], dtype=np.uint64)
        ents = [A, Z, Z, A.copy()]
        keys = [self._key(*ents)]
        dist, pred, letter = [np.zeros(1, np.int64)], [np.full(1, -1, np.int64)], [np.full(1, -1, np.int64)]
        frontier, front_idx = ents, np.zeros(1, np.int64)
        seen = np.sort(keys[0])
        total, radius = 1, 0
        while frontier[0].size and (L is None and total < target or L is not None and radius < L):
            cand = [self._mul_const(frontier, s) for s in self.gens]
            # parent-major, generator-minor order
            ce = [np.stack([c[e] for c in cand], axis=1).ravel() for e in range(4)]
            ck = self._key(*ce)
            cpar = np.repeat(front_idx, len(self.gens))
            clet = np.tile(np.arange(len(self.gens)), front_idx.size)
            uk, first = np.unique(ck, return_index=True)
            pos = np.searchsorted(seen, uk)
            pos[pos == seen.size] = 0
            fresh = seen[pos] != uk
            first = np.sort(first[fresh])
            if first.size == 0:
                break
            radius += 1
            new_idx = np.arange(total, total + first.size)
            keys.append(ck[first])
            dist.append(np.full(first.size, radius, np.int64))
            pred.append(cpar[first])
            letter.append(clet[first])
            frontier = [e[first] for e in ce]
            front_idx = new_idx
            total += first.size
            seen = np.sort(np.concatenate([seen, ck[first]]))
            if total > max_size:
                raise BaseCaseError(f"ball exceeds {max_size} elements")
        self.L = radius
        self.length_bound = 2 * radius
        self.keys = np.concatenate(keys)
        self.dist = np.concatenate(dist)
        self.pred = np.concatenate(pred)
        self.letter = np.concatenate(letter)
        order = np.argsort(self.keys, kind="stable")
        self.sorted_keys = self.keys[order]
        self.sorted_pos = order
        m_ = np.uint64(self.mask)
        k = self.keys
        self.ents = [k & m_, (k >> np.uint64(m)) & m_, (k >> np.uint64(2 * m)) & m_, (k >> np.uint64(3 * m)) & m_]
        self._words: dict[int, Word] = {0: Word.empty()}

    def __len__(self):
        return self.keys.size

    def _key(self, a, b, c, d):
        m = np.uint64(self.m)
        return a | (b << m) | (c << (m + m)) | (d << (m + m + m))

    def _mul_const(self, X, s):
        mask = self.mask
        a, b, c, d = X
        sa, sb, sc, sd = s
        return [
            _clmul_const(a, sa, mask) ^ _clmul_const(b, sc, mask),
            _clmul_const(a, sb, mask) ^ _clmul_const(b, sd, mask),
            _clmul_const(c, sa, mask) ^ _clmul_const(d, sc, mask),
            _clmul_const(c, sb, mask) ^ _clmul_const(d, sd, mask),
        ]

    def word_at(self, i: int) -> Word:
        chain = []
        while i not in self._words:
            chain.append(i)
            i = int(self.pred[i])
        w = self._words[i]
        for j in reversed(chain):
            w = w + Word.gen(int(self.letter[j]))
            self._words[j] = w
        return w

    def word(self, h: Mat2) -> Word:
        a, b, c, d = self.ents
        inv = [d, b, c, a]
        prod = self._mul_const(inv, _pack(h.truncate(self.m)))
        qk = self._key(*prod)
        pos = np.searchsorted(self.sorted_keys, qk)
        pos[pos == self.sorted_keys.size] = 0
        hit = self.sorted_keys[pos] == qk
        if not hit.any():
            raise BaseCaseError(f"no match within radius {self.L}")
        us = np.flatnonzero(hit)
        vs = self.sorted_pos[pos[us]]
        tot = self.dist[us] + self.dist[vs]
        best = int(np.argmin(tot))
        return concat(self.word_at(int(us[best])), self.word_at(int(vs[best])))
