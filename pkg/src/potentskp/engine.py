"""The power-based Solovay-Kitaev recursion over a filtration (M_n, N_n, A_n, k_n).

Words are positive by construction: a :class:`Word` is a straight-line program
whose leaves are generator indices and whose inner nodes are concatenations and
positive powers.  Words reached in deep navigation runs are far too long to
store letter by letter, so lengths are exact Python ints and evaluation walks
the program DAG once per node.
"""

from __future__ import annotations

import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .groups import FiniteQuotient


class NavigationError(RuntimeError):
    """Base class for failures of a navigation run."""


class OracleError(NavigationError):
    """A power-approximation oracle returned elements violating its contract."""


class BaseCaseError(NavigationError):
    """The base strategy could not produce a word (S does not generate, or the search radius is too small)."""


class BudgetExceeded(NavigationError):
    """A navigation run hit its call or time budget before finishing."""

    def __init__(self, msg: str, stats: dict):
        super().__init__(msg)
        self.stats = stats


_EMPTY, _GEN, _CAT, _POW = range(4)


class Word:
    """A positive word over generator indices, stored as a straight-line program."""

    __slots__ = ("kind", "a", "b", "length", "__weakref__")

    def __init__(self, kind: int, a: Any = None, b: Any = None, length: int = 0):
        self.kind = kind
        self.a = a
        self.b = b
        self.length = length

    _letters: dict = {}
    _empty: "Word"

    @classmethod
    def empty(cls) -> "Word":
        return cls._empty

    @classmethod
    def gen(cls, i: int) -> "Word":
        if i < 0:
            raise ValueError("generator indices are non-negative")
        w = cls._letters.get(i)
        if w is None:
            w = cls._letters[i] = cls(_GEN, i, None, 1)
        return w

    @classmethod
    def of(cls, indices: Sequence[int]) -> "Word":
        return concat(*(cls.gen(i) for i in indices))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            raise ValueError("positive words admit only non-negative powers")
        if k == 0 or self.kind == _EMPTY:
            return Word._empty
        if k == 1:
            return self
        return Word(_POW, self, k, self.length * k)

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __iter__(self) -> Iterator[int]:
        return self.letters()

    def letters(self) -> Iterator[int]:
        stack = [self]
        while stack:
            w = stack.pop()
            if w.kind == _GEN:
                yield w.a
            elif w.kind == _CAT:
                stack.extend(reversed(w.a))
            elif w.kind == _POW:
                stack.extend([w.a] * w.b)

    def to_list(self, limit: int = 10**7) -> list[int]:
        if self.length > limit:
            raise ValueError(f"word of length {self.length} exceeds expansion limit {limit}")
        return list(self.letters())

    def to_string(self, ngens: int, limit: int = 10**6) -> str:
        sep = "" if ngens <= 10 else "."
        return sep.join(str(i) for i in self.to_list(limit))

    def nodes(self) -> list["Word"]:
        """Distinct nodes in dependency order (children before parents)."""
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            w, done = stack.pop()
            if id(w) in seen:
                continue
            if done or w.kind in (_EMPTY, _GEN):
                seen.add(id(w))
                order.append(w)
                continue
            stack.append((w, True))
            kids = w.a if w.kind == _CAT else (w.a,)
            for c in reversed(kids):
                if id(c) not in seen:
                    stack.append((c, False))
        return order

    def to_slp(self) -> list:
        """JSON-friendly program: ``["g", i]``, ``["c", [ids]]`` or ``["p", id, k]``; the last entry is the word."""
        ids, prog = {}, []
        for w in self.nodes():
            if w.kind == _EMPTY:
                prog.append(["c", []])
            elif w.kind == _GEN:
                prog.append(["g", w.a])
            elif w.kind == _CAT:
                prog.append(["c", [ids[id(c)] for c in w.a]])
            else:
                prog.append(["p", ids[id(w.a)], w.b])
            ids[id(w)] = len(prog) - 1
        return prog

    @classmethod
    def from_slp(cls, prog: list) -> "Word":
        built: list[Word] = []
        for op in prog:
            if op[0] == "g":
                built.append(cls.gen(int(op[1])))
            elif op[0] == "c":
                built.append(concat(*(built[i] for i in op[1])))
            elif op[0] == "p":
                built.append(built[op[1]] ** int(op[2]))
            else:
                raise ValueError(f"unknown program op {op[0]!r}")
        return built[-1] if built else cls._empty

    def __repr__(self):
        if self.length <= 40:
            return f"Word({self.to_list()})"
        return f"Word(<length {self.length}>)"


Word._empty = Word(_EMPTY)


def concat(*words: Word) -> Word:
    parts = tuple(w for w in words if w.kind != _EMPTY)
    if not parts:
        return Word._empty
    if len(parts) == 1:
        return parts[0]
    return Word(_CAT, parts, None, sum(w.length for w in parts))


class Evaluator:
    """Evaluates words in a group, caching the value of every program node."""

    def __init__(self, group: FiniteQuotient, gens: Sequence):
        self.group = group
        self.gens = list(gens)
        self._cache: dict[int, Any] = {}
        self._keep: list[Word] = []  # pins cached nodes so ids stay unique

    def __call__(self, word: Word):
        G = self.group
        cache = self._cache
        if id(word) in cache:
            return cache[id(word)]
        for w in word.nodes():
            if id(w) in cache:
                continue
            if w.kind == _EMPTY:
                v = G.identity()
            elif w.kind == _GEN:
                v = self.gens[w.a]
            elif w.kind == _CAT:
                v = cache[id(w.a[0])]
                for c in w.a[1:]:
                    v = G.mul(v, cache[id(c)])
            else:
                v = G.power(cache[id(w.a)], w.b)
            cache[id(w)] = v
            self._keep.append(w)
        return cache[id(word)]


def evaluate_letters(group: FiniteQuotient, gens: Sequence, word: Word):
    """Left-to-right product over the expanded letters; an independent check for short words."""
    v = group.identity()
    for i in word.letters():
        v = group.mul(v, gens[i])
    return v


class Instance(ABC):
    """A filtration satisfying the four hypotheses of the recursion, on a finite working quotient.

    Levels are 1-based: ``N_1 >= N_2 >= ...``.  ``group`` is the working
    quotient Gamma/N_top in which elements live; ``top_level`` is the deepest
    level whose subgroup is represented faithfully there.
    """

    name = "instance"
    group: FiniteQuotient
    top_level: int

    @abstractmethod
    def A(self, n: int) -> int: ...

    @abstractmethod
    def k(self, n: int) -> int: ...

    @abstractmethod
    def in_N(self, z, n: int) -> bool: ...

    @abstractmethod
    def in_M(self, y, n: int) -> bool: ...

    @abstractmethod
    def power_approx(self, z, n: int) -> list:
        """A_n elements of M_n whose k_n-th powers multiply to z modulo N_{n+1}."""

    @abstractmethod
    def base_quotient(self) -> FiniteQuotient:
        """The finite group Gamma/N_1."""

    @abstractmethod
    def to_base(self, g):
        """Image of a working-group element in Gamma/N_1."""

    @abstractmethod
    def index_N1(self) -> int: ...

    def class_key(self, g, n: int):
        """Hashable key constant on cosets of N_n (finer keys are allowed)."""
        return self.group.key(g)

    def residue_exponents(self, z, n: int):
        return None

    def sample_N(self, n: int, rng):
        raise NotImplementedError

    def sample_M(self, n: int, rng):
        raise NotImplementedError

    def residue_classes(self, n: int):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"name": self.name, "top_level": self.top_level}


def level_bound(inst: Instance, base_length: int, n: int) -> int:
    """base_length * prod_{i<n} (1 + A_i k_i)."""
    b = base_length
    for i in range(1, n):
        b *= 1 + inst.A(i) * inst.k(i)
    return b


@dataclass
class NavigationResult:
    group: str
    level: int
    generators: list[str]
    word: Word
    bound: int
    index_bound: int
    evaluation_ok: bool
    certified: bool
    base: str
    trace: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def length(self) -> int:
        return self.word.length

    def to_record(self, *, expand_limit: int = 10**5, timing: bool = False) -> dict:
        rec = {
            "group": self.group,
            "level": self.level,
            "generators": self.generators,
            "word": self.word.to_string(len(self.generators)) if self.length <= expand_limit else None,
            "length": self.length,
            "bound": self.bound,
            "index_bound": self.index_bound,
            "certified": self.certified,
            "evaluation_ok": self.evaluation_ok,
            "base": self.base,
            "trace": self.trace,
            "stats": self.stats,
        }
        if self.length > expand_limit:
            rec["slp"] = self.word.to_slp()
        if timing:
            rec["seconds"] = round(self.seconds, 6)
        return rec


class Navigator:
    """Runs APPROX(n, i, g, S) with a memo table shared across calls on one generating set."""

    def __init__(self, inst: Instance, gens: Sequence, base, *, hp_checks: bool = True,
                 max_calls: int | None = None, max_seconds: float | None = None):
        self.inst = inst
        self.max_calls = max_calls
        self.max_seconds = max_seconds
        self._deadline = None
        self._call_limit = None
        self.gens = list(gens)
        self.base = base
        self.hp_checks = hp_checks
        self.evaluate = Evaluator(inst.group, self.gens)
        self.memo: dict = {}
        self.stats = {"calls": 0, "memo_hits": 0, "base_calls": 0, "oracle_calls": 0, "trivial_residues": 0,
                      "nonempty_base_words": 0}

    def _approx(self, i: int, g, trace: list | None = None):
        inst, G = self.inst, self.inst.group
        key = (i, inst.class_key(g, i))
        if trace is None:
            hit = self.memo.get(key)
            if hit is not None:
                self.stats["memo_hits"] += 1
                return hit
        self.stats["calls"] += 1
        if self._call_limit is not None and self.stats["calls"] > self._call_limit:
            raise BudgetExceeded(f"call budget {self.max_calls} exhausted", dict(self.stats))
        if self._deadline is not None and time.perf_counter() > self._deadline:
            raise BudgetExceeded(f"time budget {self.max_seconds} s exhausted", dict(self.stats))
        if i == 1:
            self.stats["base_calls"] += 1
            word = self.base.word(inst.to_base(g))
            self.stats["nonempty_base_words"] += word.length > 0
            out = (word, self.evaluate(word))
            self.memo[key] = out
            return out
        calls_before = self.stats["calls"]
        w_word, w = self._approx(i - 1, g, trace)
        z = G.mul(G.inv(w), g)
        if not inst.in_N(z, i - 1):
            raise OracleError(f"level {i - 1} approximation left residue outside N_{i - 1}")
        rec = {"level": i - 1, "A": inst.A(i - 1), "k": inst.k(i - 1)}
        if inst.in_N(z, i):
            self.stats["trivial_residues"] += 1
            out = (w_word, w)
            rec.update(trivial=True, residue_exponents=None, congruence_ok=True, subcalls=0)
        else:
            k = inst.k(i - 1)
            self.stats["oracle_calls"] += 1
            ys = inst.power_approx(z, i - 1)
            self._check_oracle(ys, z, i - 1)
            subs = [self._approx(i - 1, y) for y in ys]
            if trace is not None and self.hp_checks:
                for y, (_, v) in zip(ys, subs):
                    d = G.mul(G.power(y, k), G.inv(G.power(v, k)))
                    if not inst.in_N(d, i):
                        raise OracleError(f"power-commutator law failed at level {i - 1}")
            word = concat(w_word, *(v_word ** k for v_word, _ in subs))
            val = w
            for _, v in subs:
                val = G.mul(val, G.power(v, k))
            out = (word, val)
            rec.update(
                trivial=False,
                residue_exponents=inst.residue_exponents(z, i - 1) if trace is not None else None,
                congruence_ok=True,
                subcalls=self.stats["calls"] - calls_before,
            )
        if trace is not None:
            trace.append(rec)
        self.memo[key] = out
        return out

    def _check_oracle(self, ys, z, n):
        inst, G = self.inst, self.inst.group
        if len(ys) != inst.A(n):
            raise OracleError(f"oracle returned {len(ys)} elements at level {n}, expected {inst.A(n)}")
        for y in ys:
            if not inst.in_M(y, n):
                raise OracleError(f"oracle output outside M_{n}")
        k = inst.k(n)
        prod = G.identity()
        for y in ys:
            prod = G.mul(prod, G.power(y, k))
        if not inst.in_N(G.mul(prod, G.inv(z)), n + 1):
            raise OracleError(f"oracle congruence violated at level {n}")

    def navigate(self, g, n: int | None = None, *, letter_check_limit: int = 10**5) -> NavigationResult:
        inst, G = self.inst, self.inst.group
        n = inst.top_level if n is None else n
        t0 = time.perf_counter()
        before = dict(self.stats)
        trace: list[dict] = []
        self._deadline = None if self.max_seconds is None else t0 + self.max_seconds
        self._call_limit = None if self.max_calls is None else self.stats["calls"] + self.max_calls
        try:
            word, _ = self._approx(n, g, trace)
        finally:
            self._deadline = self._call_limit = None
        # independent re-evaluation of the returned word
        val = Evaluator(G, self.gens)(word)
        ok = inst.in_N(G.mul(G.inv(val), g), n)
        if ok and word.length <= letter_check_limit:
            ok = inst.in_N(G.mul(G.inv(evaluate_letters(G, self.gens, word)), g), n)
        bound = level_bound(inst, self.base.length_bound, n)
        by_index = level_bound(inst, inst.index_N1(), n)
        return NavigationResult(
            group=inst.name,
            level=n,
            generators=[G.serialize(s) for s in self.gens],
            word=word,
            bound=bound,
            index_bound=by_index,
            evaluation_ok=ok,
            certified=ok and word.length <= bound,
            base=self.base.name,
            trace=trace,
            stats={key: v - before[key] for key, v in self.stats.items()},
            seconds=time.perf_counter() - t0,
        )


def approx(inst: Instance, g, gens: Sequence, base, n: int | None = None) -> NavigationResult:
    """Positive word for g modulo N_n in the generators ``gens`` (single-shot convenience)."""
    return Navigator(inst, gens, base).navigate(g, n)


def log_ratio(x: float, y: float) -> float:
    return math.log(x) / math.log(y)
