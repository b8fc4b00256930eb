"""Exact directed balls and diameters, and randomized/exhaustive checks of the recursion hypotheses."""

from __future__ import annotations

import hashlib
import pickle
from collections import deque
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import Instance, OracleError, Word
from .groups import FiniteQuotient, ThresholdError

DEFAULT_BFS_THRESHOLD = 10**7


class NotGeneratingError(ValueError):
    """The generating set does not generate the whole group."""


class DirectedBallTable:
    """Shortest positive words from a breadth-first search over right multiplication.

    Element ``i`` (in discovery order) has distance ``dist[i]`` and equals
    ``elements[pred[i]] * gens[letter[i]]``; ties go to the first parent
    discovered and then the least generator index.
    """

    def __init__(self, group: FiniteQuotient, gens: Sequence, radius: int | None = None,
                 threshold: int = DEFAULT_BFS_THRESHOLD):
        if group.order is not None and radius is None and group.order > threshold:
            raise ThresholdError(f"{group.name} has {group.order} elements, above threshold {threshold}")
        self.group = group
        self.gens = list(gens)
        e = group.identity()
        self.index = {group.key(e): 0}
        self.elements = [e]
        dist, pred, letter = [0], [-1], [-1]
        queue = deque([0])
        while queue:
            i = queue.popleft()
            d = dist[i]
            if radius is not None and d >= radius:
                continue
            g = self.elements[i]
            for s_idx, s in enumerate(self.gens):
                h = group.mul(g, s)
                kh = group.key(h)
                if kh in self.index:
                    continue
                self.index[kh] = len(self.elements)
                self.elements.append(h)
                dist.append(d + 1)
                pred.append(i)
                letter.append(s_idx)
                queue.append(len(self.elements) - 1)
                if len(self.elements) > threshold:
                    raise ThresholdError(f"ball exceeds threshold {threshold}")
        self.dist = np.asarray(dist, dtype=np.int64)
        self.pred = np.asarray(pred, dtype=np.int64)
        self.letter = np.asarray(letter, dtype=np.int64)
        self.radius = int(self.dist.max())
        self.complete = group.order is not None and len(self.elements) == group.order
        self._words: dict[int, Word] = {0: Word.empty()}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return self.group.key(g) in self.index

    def distance(self, g) -> int:
        return int(self.dist[self.index[self.group.key(g)]])

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

    def word(self, g) -> Word:
        i = self.index.get(self.group.key(g))
        if i is None:
            raise KeyError("element outside the ball")
        return self.word_at(i)

    def spheres(self) -> list[int]:
        return np.bincount(self.dist).tolist()

    def cache_key(self) -> tuple:
        return (self.group.describe(), tuple(self.group.serialize(s) for s in self.gens))

    def save(self, path: str | Path) -> None:
        payload = {
            "key": self.cache_key(),
            "elements": [self.group.serialize(g) for g in self.elements],
            "dist": self.dist, "pred": self.pred, "letter": self.letter,
        }
        with open(path, "wb") as fh:
            pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)

    @classmethod
    def load(cls, path: str | Path, group: FiniteQuotient, gens: Sequence) -> "DirectedBallTable":
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
        self = cls.__new__(cls)
        self.group, self.gens = group, list(gens)
        if payload["key"] != self.cache_key():
            raise ValueError("cached ball table belongs to a different group or generating set")
        self.elements = [group.parse(s) for s in payload["elements"]]
        self.index = {group.key(g): i for i, g in enumerate(self.elements)}
        self.dist, self.pred, self.letter = payload["dist"], payload["pred"], payload["letter"]
        self.radius = int(self.dist.max())
        self.complete = group.order is not None and len(self.elements) == group.order
        self._words = {0: Word.empty()}
        return self


def cached_ball(group: FiniteQuotient, gens: Sequence, cache_dir: str | Path | None = None,
                threshold: int = DEFAULT_BFS_THRESHOLD) -> DirectedBallTable:
    """Ball table, read from or written to ``cache_dir`` when given."""
    if cache_dir is None:
        return DirectedBallTable(group, gens, threshold=threshold)
    key = repr((group.describe(), tuple(group.serialize(s) for s in gens))).encode()
    path = Path(cache_dir) / f"ball-{hashlib.sha256(key).hexdigest()[:20]}.pkl"
    if path.exists():
        return DirectedBallTable.load(path, group, gens)
    table = DirectedBallTable(group, gens, threshold=threshold)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


def directed_diameter(group: FiniteQuotient, gens: Sequence, threshold: int = DEFAULT_BFS_THRESHOLD) -> int:
    table = DirectedBallTable(group, gens, threshold=threshold)
    if group.order is not None and len(table) != group.order:
        raise NotGeneratingError(f"generators reach {len(table)} of {group.order} elements")
    return table.radius


def _check_power_approx(inst: Instance, z, n: int):
    """None if the oracle output for z is valid, else a short reason."""
    G = inst.group
    try:
        ys = inst.power_approx(z, n)
    except OracleError as exc:
        return f"oracle raised: {exc}"
    if len(ys) != inst.A(n):
        return "wrong number of outputs"
    if not all(inst.in_M(y, n) for y in ys):
        return "output outside M"
    k = inst.k(n)
    prod = G.identity()
    for y in ys:
        prod = G.mul(prod, G.power(y, k))
    if not inst.in_N(G.mul(prod, G.inv(z)), n + 1):
        return "congruence fails"
    return None


def verify_hypotheses(inst: Instance, levels: Sequence[int], samples: int, seed: int = 0) -> dict:
    """Randomized pass/fail counts for the four hypotheses at each level.

    (i) N_n <= M_n and N_{n+1} <= N_n; (ii) [M_n, N_n] <= N_{n+1};
    (iii) k_n-th powers of N_n lie in N_{n+1}; (iv) the oracle output is in M_n
    and its k_n-th powers multiply to the input modulo N_{n+1}.
    """
    rng = np.random.default_rng(seed)
    G = inst.group
    report = {"levels": [], "ok": True}
    for n in levels:
        counts = {h: [0, 0] for h in ("i", "ii", "iii", "iv")}
        failures = []
        for _ in range(samples):
            z = inst.sample_N(n, rng)
            z1 = inst.sample_N(n + 1, rng)
            y = inst.sample_M(n, rng)
            checks = {
                "i": inst.in_N(z, n) and inst.in_M(z, n) and inst.in_N(z1, n),
                "ii": inst.in_N(G.comm(y, z), n + 1),
                "iii": inst.in_N(G.power(z, inst.k(n)), n + 1),
            }
            reason = _check_power_approx(inst, z, n)
            checks["iv"] = reason is None
            for h, ok in checks.items():
                counts[h][0 if ok else 1] += 1
                if not ok and len(failures) < 5:
                    failures.append({"hypothesis": h, "reason": reason if h == "iv" else "membership fails"})
        level_ok = all(c[1] == 0 for c in counts.values())
        report["ok"] &= level_ok
        report["levels"].append({
            "n": n,
            "passed": {h: c[0] for h, c in counts.items()},
            "failed": {h: c[1] for h, c in counts.items()},
            "ok": level_ok,
            "failures": failures,
        })
    return report


def exhaustive_residue_check(inst: Instance, level: int, limit: int = 3**6) -> dict:
    """Run the oracle on one representative of every class of N_n / N_{n+1}."""
    reps = inst.residue_classes(level)
    if len(reps) > limit:
        raise ThresholdError(f"{len(reps)} residue classes exceed limit {limit}")
    G = inst.group
    passed, failed = 0, []
    trivial_ok = True
    for z in reps:
        reason = _check_power_approx(inst, z, level)
        if reason is None:
            passed += 1
        else:
            failed.append(reason)
        if inst.in_N(z, level + 1):
            ys = inst.power_approx(z, level)
            trivial_ok &= all(G.is_identity(y) for y in ys)
    return {
        "level": level,
        "classes": len(reps),
        "passed": passed,
        "failed": len(failed),
        "trivial_class_identity": trivial_ok,
        "ok": not failed and trivial_ok,
    }
