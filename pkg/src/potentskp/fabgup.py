"""The six-step periodic filtration of the Fabrykowski-Gupta group and its cube oracle.

Notation.  K is the normal closure of x1 = [a, b], x2 = [a, x1], and for a
subgroup H of K the group H^(x3^j) consists of the elements of Stab(j) whose
level-j sections all lie in H.  K / Stab(2) is elementary abelian of order 9
with basis x1, x2, so an element of K^(x3^j) is described modulo Stab(j+2) by
its section coordinates: the pairs (lambda, mu) with section = x1^lambda
x2^mu, one pair per level-j vertex.

For n = 6q + r (r = 1..6) the subgroup N_n is U_r^(x3^p) with p = q + offset,
where U_r is a subgroup of K^(x3^e) given by linear conditions on section
coordinates at depth e:

    r  offset  e  U_r  -> U_{r+1}  unit residue basis       A
    1    0     3  K    -> K10      000(x1) and a-conjugates 9
    2    0     3  K10  -> K20      010(x1) and a-conjugates 18
    3    1     2  K20  -> K1       20(x1)                   4
    4    1     2  K1   -> K2       01(x1) and a-conjugates  6
    5    1     2  K2   -> L        02(x1) and a-conjugates  6
    6    2     1  L    -> 1        0(x2) and a-conjugates   3

with M_n = K^(x3^(q + offset)) and k_n = 3 throughout.  The oracle solves
each level-p block on its own: the block residue is written in the unit
basis, and a fixed list of cube roots for that residue is placed back at
every vertex of level p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .engine import Instance, OracleError
from .groups import ThresholdError
from .treeauto import (Portrait, PortraitGroup, bold_word, gen_a, gen_b, offsets, place_array, pt_comm,
                       pt_conj, pt_inv, pt_mul, pt_pow, size, stab_level)

P = 3
BASE_DEPTH = 4  # N_1 = Stab(4)


class CoordinateError(ValueError):
    """The element does not lie in the subgroup its coordinates are requested for."""


# -- generators and coordinates --------------------------------------------------------------


@lru_cache(maxsize=None)
def x1(m: int) -> Portrait:
    return pt_comm(gen_a(m), gen_b(m))


@lru_cache(maxsize=None)
def x2(m: int) -> Portrait:
    return pt_comm(gen_a(m), x1(m))


def _code2(g: Portrait) -> int:
    """Index of g modulo Stab(2) among the 81 labelings of levels 0 and 1."""
    lab = g.labels
    return int(lab[0]) * 27 + int(lab[1]) * 9 + int(lab[2]) * 3 + int(lab[3])


@lru_cache(maxsize=None)
def _tables() -> tuple[np.ndarray, np.ndarray]:
    """(ab, kc): abelianization exponents of every class of Gamma/Stab(2), and (lambda, mu) on K/Stab(2)."""
    a, b = gen_a(2), gen_b(2)
    ab = np.full((81, 2), -1, np.int64)
    ab[0] = 0
    frontier = [(Portrait.identity(2), (0, 0))]
    while frontier:
        nxt = []
        for g, (i, j) in frontier:
            for s, d in ((a, (1, 0)), (b, (0, 1))):
                h = pt_mul(g, s)
                e = ((i + d[0]) % 3, (j + d[1]) % 3)
                c = _code2(h)
                if ab[c, 0] < 0:
                    ab[c] = e
                    nxt.append((h, e))
                elif tuple(ab[c]) != e:
                    raise AssertionError("abelianization is not well defined modulo Stab(2)")
        frontier = nxt
    if (ab < 0).any():
        raise AssertionError("a and b do not generate Gamma/Stab(2)")
    kc = np.full((81, 2), -1, np.int64)
    for lam in range(3):
        for mu in range(3):
            c = _code2(pt_mul(pt_pow(x1(2), lam), pt_pow(x2(2), mu)))
            if kc[c, 0] >= 0:
                raise AssertionError("x1, x2 are not independent modulo Stab(2)")
            kc[c] = (lam, mu)
    return ab, kc


def ab_coords(g: Portrait) -> tuple[int, int]:
    """Exponents (i, j) with g in a^i b^j K."""
    if g.depth < 2:
        raise CoordinateError("abelianization needs depth at least 2")
    i, j = _tables()[0][_code2(g)]
    return int(i), int(j)


def k_coords(g: Portrait) -> tuple[int, int]:
    """(lambda, mu) with g = x1^lambda x2^mu modulo Stab(2), for g in K."""
    if g.depth < 2:
        raise CoordinateError("K coordinates need depth at least 2")
    lam, mu = _tables()[1][_code2(g)]
    if lam < 0:
        raise CoordinateError("element is not in K")
    return int(lam), int(mu)


def section_coords(z: Portrait, j: int) -> np.ndarray:
    """Interleaved (lambda, mu) of the level-j sections, a vector of length 2 * 3^j; z must lie in K^(x3^j)."""
    if z.depth < j + 2:
        raise CoordinateError(f"coordinates at level {j} need depth at least {j + 2}")
    if stab_level(z) < j:
        raise CoordinateError(f"element does not fix level {j}")
    off = offsets(z.depth)
    roots = z.labels[off[j]:off[j + 1]].astype(np.int64)
    kids = z.labels[off[j + 1]:off[j + 2]].astype(np.int64).reshape(-1, 3)
    codes = roots * 27 + kids @ np.array([9, 3, 1])
    kc = _tables()[1][codes]
    if (kc < 0).any():
        raise CoordinateError(f"a level-{j} section is not in K")
    return kc.ravel()


# -- the unit subgroups as coordinate subspaces ------------------------------------------------


def _block_sum(rows: np.ndarray, dim: int) -> np.ndarray:
    return np.kron(np.eye(3, dtype=np.int64), rows.reshape(-1, dim))


def _coords_of(digits: str, x: str, e: int) -> np.ndarray:
    base = x1 if x == "x1" else x2
    g = bold_word(digits, base(e + 2 - len(digits)))
    return section_coords(g, e)


@lru_cache(maxsize=None)
def unit_space(name: str, e: int) -> np.ndarray:
    """Row basis of the coordinate subspace of the unit subgroup ``name`` at depth e (ambient dim 2 * 3^e).

    ``K`` is everything, ``1`` is trivial, ``L`` is the normal closure of x2,
    ``K1`` and ``K2`` live at depth 1, ``K10`` and ``K20`` at depth 2; deeper
    depths are block sums of three copies.
    """
    dim = 2 * 3**e
    if name == "K":
        return np.eye(dim, dtype=np.int64)
    if name == "1":
        return np.zeros((0, dim), np.int64)
    home = {"L": 0, "K1": 1, "K2": 1, "K10": 2, "K20": 2}
    if name not in home:
        raise KeyError(f"unknown unit subgroup {name!r}")
    if e < home[name]:
        raise ValueError(f"{name} is defined at depth {home[name]} and below")
    if e > home[name]:
        return linalg.row_basis(_block_sum(unit_space(name, e - 1), dim // 3), P, dim)
    if name == "L":
        return np.array([[0, 1]], np.int64)
    rows = [unit_space("L", e)]
    if name in ("K1", "K2"):
        rows += [_coords_of(d, "x1", 1)[None] for d in ("12" if name == "K1" else "2")]
    else:
        r = 1 if name == "K10" else 2
        rows += [_coords_of(f"{t}{u}", "x1", 2)[None] for t in range(3) for u in range(3) if t + 3 * u >= r]
    return linalg.row_basis(np.concatenate(rows), P, dim)


@dataclass(frozen=True)
class StepType:
    r: int
    offset: int
    e: int
    unit: str
    next_unit: str
    generator: str  # bold digits applied to x1 or x2
    letter: str
    conjugates: bool
    A: int


STEP_TYPES = {
    1: StepType(1, 0, 3, "K", "K10", "000", "x1", True, 9),
    2: StepType(2, 0, 3, "K10", "K20", "010", "x1", True, 18),
    3: StepType(3, 1, 2, "K20", "K1", "20", "x1", False, 4),
    4: StepType(4, 1, 2, "K1", "K2", "01", "x1", True, 6),
    5: StepType(5, 1, 2, "K2", "L", "02", "x1", True, 6),
    6: StepType(6, 2, 1, "L", "1", "0", "x2", True, 3),
}


@dataclass(frozen=True)
class ChainPosition:
    n: int
    q: int
    r: int
    place: int  # level p of the blocks
    e: int
    unit: str
    next_unit: str
    A: int
    M_level: int  # M_n = K^(x3^M_level)

    @property
    def d(self) -> int:
        return 3 if STEP_TYPES[self.r].conjugates else 1

    def describe(self) -> dict:
        return {
            "n": self.n, "step_type": self.r, "unit": self.unit, "unit_depth": self.e, "place": self.place,
            "M": f"K^(x3^{self.M_level})", "A": self.A, "k": 3,
            "classes": 3 ** (self.d * 3**self.place),
        }


def chain_position(n: int) -> ChainPosition:
    if n < 1:
        raise ValueError("levels start at 1")
    q, r = divmod(n - 1, 6)
    st = STEP_TYPES[r + 1]
    p = q + st.offset
    return ChainPosition(n, q, r + 1, p, st.e, st.unit, st.next_unit, st.A, p)


@lru_cache(maxsize=None)
def _step_linear(r: int) -> dict:
    """Parity checks for U_r and U_{r+1} and the projection onto the unit residue basis."""
    st = STEP_TYPES[r]
    e, dim = st.e, 2 * 3**st.e
    U, V = unit_space(st.unit, e), unit_space(st.next_unit, e)
    gens = _unit_generators(r, e + 2)
    gvecs = np.array([section_coords(g, e) for g in gens], np.int64)
    d = len(gens)
    basis = np.concatenate([gvecs, V]) if V.size else gvecs
    if linalg.rank(basis, P) != V.shape[0] + d or linalg.rank(U, P) != V.shape[0] + d:
        raise AssertionError(f"unit residue basis of step type {r} does not span U/U'")
    if linalg.rank(np.concatenate([U, gvecs]), P) != U.shape[0]:
        raise AssertionError(f"unit residue basis of step type {r} is not inside U")
    full = np.concatenate([basis, linalg.complement(basis, P, dim)])
    proj = linalg.inverse(full.T, P)[:d]  # first d coordinates in the basis ``full``
    return {
        "H_unit": linalg.check_matrix(U, P, dim),
        "H_next": linalg.check_matrix(V, P, dim),
        "proj": proj,
        "d": d,
        "dim": dim,
    }


def _unit_generators(r: int, D: int) -> list[Portrait]:
    st = STEP_TYPES[r]
    base = x1 if st.letter == "x1" else x2
    g = bold_word(st.generator, base(D - len(st.generator)))
    if not st.conjugates:
        return [g]
    a = gen_a(D)
    return [g, pt_conj(g, a), pt_conj(g, pt_mul(a, a))]


# -- cube identities ---------------------------------------------------------------------------


def _c(x, *hs):
    """x conjugated by the product of hs."""
    h = hs[0]
    for t in hs[1:]:
        h = pt_mul(h, t)
    return pt_conj(x, h)


def cube_factors(r: int, D: int) -> list[Portrait]:
    """Elements of K whose cubes, multiplied in order, give the unit residue generator of step type r."""
    a, b, X1, X2 = gen_a(D), gen_b(D), x1(D), x2(D)
    ai, bi = pt_inv(a), pt_inv(b)
    inv = pt_inv
    if r in (1, 2):
        b_a = _c(b, a)
        o = bold_word("0", x1(D - 1))
        u1, u2 = _c(X1, b, a), _c(o, b_a)
        U, V, W = pt_mul(u1, u2), inv(u1), inv(u2)
        if r == 1:
            return [U, V, W]
        Pp = _c(o, b_a, b)
        Q = _c(X1, b, a, b)
        R = pt_mul(Q, Pp)
        return [Pp, Q, inv(R), U, V, W]
    if r == 3:
        return [inv(X2), inv(_c(X1, b, ai)), inv(_c(X1, a)), inv(_c(X1, bi))]
    if r == 4:
        return [X1, inv(_c(X1, b))]
    if r == 5:
        o = bold_word("0", x1(D - 1))
        t = _c(X1, ai)
        return [pt_mul(o, t), inv(t)]
    if r == 6:
        return [inv(X1)]
    raise ValueError(f"unknown step type {r}")


@lru_cache(maxsize=None)
def unit_tables(r: int, D: int) -> tuple[np.ndarray, np.ndarray]:
    """(Y, G) for step type r at depth D.

    Y[c, j] holds the labels of the j-th cube root for residue combination c
    (c = sum_i e_i 3^i over the unit basis), G[c] the labels of the
    corresponding product of unit basis elements.
    """
    st = STEP_TYPES[r]
    if D < st.e + 2:
        raise ValueError(f"step type {r} needs section depth at least {st.e + 2}")
    d = 3 if st.conjugates else 1
    facs = cube_factors(r, D)
    a = gen_a(D)
    conj_lists = []
    h = Portrait.identity(D)
    for i in range(d):
        conj_lists.append([pt_conj(f, h) for f in facs])
        h = pt_mul(h, a)
    gens = _unit_generators(r, D)
    e_ = Portrait.identity(D)
    ncomb = 3**d
    Y = np.zeros((ncomb, st.A, size(D)), np.uint8)
    G = np.zeros((ncomb, size(D)), np.uint8)
    for c in range(ncomb):
        exps = [(c // 3**i) % 3 for i in range(d)]
        ys, g = [], e_
        for i, ex in enumerate(exps):
            part = conj_lists[i]
            if ex == 0:
                ys += [e_] * len(part)
            elif ex == 1:
                ys += part
            else:
                ys += [pt_inv(y) for y in reversed(part)]
            g = pt_mul(g, pt_pow(gens[i], ex))
        for j, y in enumerate(ys):
            Y[c, j] = y.labels
        G[c] = g.labels
    return Y, G


def verify_unit_step(r: int, D: int | None = None) -> dict:
    """Check the cube identity of step type r for every residue combination at section depth D.

    The product of cubes must agree with the unit residue element modulo the
    next unit subgroup, and be exactly equal to it for the generator itself
    when the identity is exact (step types 1, 2 and 4).
    """
    st = STEP_TYPES[r]
    D = st.e + 2 if D is None else D
    lin = _step_linear(r)
    Y, G = unit_tables(r, D)
    ok, exact = 0, None
    for c in range(Y.shape[0]):
        prod = Portrait.identity(D)
        for j in range(st.A):
            prod = pt_mul(prod, pt_pow(Portrait._raw(D, Y[c, j].copy()), 3))
        g = Portrait._raw(D, G[c].copy())
        diff = pt_mul(prod, pt_inv(g))
        good = stab_level(diff) >= st.e + 1 and not (lin["H_next"] @ section_coords(diff, st.e) % P).any()
        ok += bool(good)
        if c == 1:
            exact = diff == Portrait.identity(D)
    in_K = all(stab_level(Portrait._raw(D, y.copy())) >= 1 and ab_coords(Portrait._raw(D, y.copy())) == (0, 0)
               for y in Y.reshape(-1, size(D)))
    return {"step_type": r, "depth": D, "classes": Y.shape[0], "passed": ok, "exact_for_generator": exact,
            "roots_in_K": in_K, "ok": ok == Y.shape[0] and in_K}


# -- the instance ------------------------------------------------------------------------------


class FabGupInstance(Instance):
    """The six-step periodic filtration on Gamma / Stab(m); N_1 = Stab(4) and N_top = Stab(m)."""

    def __init__(self, m: int):
        if m < BASE_DEPTH:
            raise ValueError(f"working depth must be at least {BASE_DEPTH}")
        self.m = m
        self.group = PortraitGroup(m)
        self.top_level = 6 * (m - BASE_DEPTH) + 1
        self.name = f"fabgup:depth={m}"

    # parameters
    def A(self, n):
        return chain_position(n).A

    def k(self, n):
        return 3

    def position(self, n) -> ChainPosition:
        return chain_position(n)

    # membership
    def in_N(self, z, n):
        if n >= self.top_level:
            return stab_level(z) >= self.m
        c = chain_position(n)
        s = stab_level(z)
        if c.unit == "K":
            return s >= c.place + c.e + 1
        if s < c.place + c.e + 1:
            return False
        if s >= self.m:
            return True
        v = section_coords(z, c.place + c.e).reshape(3**c.place, -1)
        return not (v @ _step_linear(c.r)["H_unit"].T % P).any()

    def in_M(self, y, n):
        j = chain_position(n).M_level
        if j == 0:
            return stab_level(y) >= self.m or ab_coords(y) == (0, 0)
        return stab_level(y) >= j + 1

    # oracle
    def _combos(self, z, c: ChainPosition) -> np.ndarray:
        lin = _step_linear(c.r)
        v = section_coords(z, c.place + c.e).reshape(3**c.place, -1)
        ex = v @ lin["proj"].T % P
        return ex @ (3 ** np.arange(lin["d"]))

    def residue_exponents(self, z, n):
        c = chain_position(n)
        if not self.in_N(z, n):
            raise OracleError(f"input outside N_{n}")
        lin = _step_linear(c.r)
        v = section_coords(z, c.place + c.e).reshape(3**c.place, -1)
        ex = (v @ lin["proj"].T % P).tolist()
        return [[x if x < 2 else -1 for x in row] for row in ex]

    def power_approx(self, z, n):
        if n >= self.top_level:
            raise OracleError(f"level {n} is at or beyond the working depth")
        c = chain_position(n)
        if not self.in_N(z, n):
            raise OracleError(f"input outside N_{n}")
        if self.in_N(z, n + 1):
            e = self.group.identity()
            return [e] * c.A
        combos = self._combos(z, c)
        Y, _ = unit_tables(c.r, self.m - c.place)
        return [place_array(Y[combos, j], c.place) for j in range(c.A)]

    # base case
    def base_quotient(self):
        return PortraitGroup(BASE_DEPTH)

    def to_base(self, g):
        return g.truncate(BASE_DEPTH)

    def index_N1(self):
        return 3**28

    def class_key(self, g, n):
        depth = min(self.m, chain_position(n).q + BASE_DEPTH + 1)
        return g.labels[:size(depth)].tobytes()

    # sampling
    def sample_gamma(self, rng) -> Portrait:
        a, b = gen_a(self.m), gen_b(self.m)
        head = pt_mul(pt_pow(a, int(rng.integers(3))), pt_pow(b, int(rng.integers(3))))
        return pt_mul(head, self.sample_K(0, rng))

    def sample_K(self, j: int, rng) -> Portrait:
        """Uniform element of K^(x3^j) / Stab(m)."""
        m = self.m
        out = Portrait.identity(m)
        for l in range(j, m - 1):
            tab = _k_table(m - l)
            out = pt_mul(out, place_array(tab[rng.integers(9, size=3**l)], l))
        return out

    def sample_N(self, n, rng):
        out = Portrait.identity(self.m)
        for s in range(n, self.top_level):
            c = chain_position(s)
            _, G = unit_tables(c.r, self.m - c.place)
            pick = rng.integers(G.shape[0], size=3**c.place)
            out = pt_mul(out, place_array(G[pick], c.place))
        return out

    def sample_M(self, n, rng):
        return self.sample_K(chain_position(n).M_level, rng)

    def residue_generators(self, n) -> list[Portrait]:
        """The unit residue basis of step n placed at each level-p vertex; together with N_{n+1} they generate N_n."""
        c = chain_position(n)
        D = self.m - c.place
        if D < c.e + 2:
            return []
        out = []
        for g in _unit_generators(c.r, D):
            for v in range(3**c.place):
                blocks = np.zeros((3**c.place, size(D)), np.uint8)
                blocks[v] = g.labels
                out.append(place_array(blocks, c.place))
        return out

    def residue_classes(self, n, limit: int = 3**6):
        c = chain_position(n)
        _, G = unit_tables(c.r, self.m - c.place)
        total = G.shape[0] ** (3**c.place)
        if total > limit:
            raise ThresholdError(f"{total} residue classes exceed limit {limit}")
        return [place_array(G[list(combo)], c.place)
                for combo in itertools.product(range(G.shape[0]), repeat=3**c.place)]

    def describe(self):
        return {"name": self.name, "depth": self.m, "top_level": self.top_level,
                "index_N1": "3^28", "period_A": [STEP_TYPES[r].A for r in range(1, 7)]}


@lru_cache(maxsize=None)
def _k_table(D: int) -> np.ndarray:
    """Labels of x1^lambda x2^mu at depth D, row 3 lambda + mu."""
    return np.stack([pt_mul(pt_pow(x1(D), lam), pt_pow(x2(D), mu)).labels
                     for lam in range(3) for mu in range(3)])


class UnitStep(Instance):
    """A one-step filtration U_r >= U_{r+1} at section depth D, exercising the unit cube oracle on its own."""

    def __init__(self, r: int, D: int | None = None):
        self.st = STEP_TYPES[r]
        self.r = r
        self.D = self.st.e + 2 if D is None else D
        self.group = PortraitGroup(self.D)
        self.top_level = 2
        self.name = f"fabgup-unit:r={r}:depth={self.D}"

    def A(self, n):
        return self.st.A

    def k(self, n):
        return 3

    def in_N(self, z, n):
        name = self.st.unit if n == 1 else self.st.next_unit
        s = stab_level(z)
        if s >= self.D:
            return True
        if s < self.st.e + 1:
            return False
        if name == "K":
            return True
        H = _step_linear(self.r)["H_unit" if n == 1 else "H_next"]
        return not (H @ section_coords(z, self.st.e) % P).any()

    def in_M(self, y, n):
        return stab_level(y) >= self.D or ab_coords(y) == (0, 0)

    def power_approx(self, z, n):
        if not self.in_N(z, 1):
            raise OracleError("input outside the unit subgroup")
        if self.in_N(z, 2):
            return [self.group.identity()] * self.st.A
        lin = _step_linear(self.r)
        ex = section_coords(z, self.st.e) @ lin["proj"].T % P
        c = int(ex @ (3 ** np.arange(lin["d"])))
        Y, _ = unit_tables(self.r, self.D)
        return [Portrait._raw(self.D, Y[c, j].copy()) for j in range(self.st.A)]

    def base_quotient(self):
        return PortraitGroup(self.D)

    def to_base(self, g):
        return g

    def index_N1(self):
        raise NotImplementedError

    def residue_classes(self, n):
        _, G = unit_tables(self.r, self.D)
        return [Portrait._raw(self.D, row.copy()) for row in G]


def layered_base(gens=None):
    """Base words for Gamma/Stab(4): BFS on Gamma/Stab(3) plus the 18-dimensional layer Stab(3)/Stab(4)."""
    from .bases import LayeredBase

    gens = [gen_a(BASE_DEPTH), gen_b(BASE_DEPTH)] if gens is None else [g.truncate(BASE_DEPTH) for g in gens]
    return LayeredBase(PortraitGroup(BASE_DEPTH, key_depth=BASE_DEPTH - 1), PortraitGroup(BASE_DEPTH), gens,
                       lambda r: section_coords(r, BASE_DEPTH - 2), P, 2 * 3**(BASE_DEPTH - 2))
