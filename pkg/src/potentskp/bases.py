"""Base-case strategies: positive words for elements of the coarsest quotient Gamma/N_1."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import linalg
from .engine import BaseCaseError, Word, concat
from .groups import FiniteQuotient
from .oracle import DEFAULT_BFS_THRESHOLD, DirectedBallTable, cached_ball


class BfsBase:
    """Shortest positive words from a complete directed ball table.

    ``length_bound`` is the exact directed diameter, which never exceeds the
    group order, so the length certificate of the recursion is preserved.
    """

    name = "bfs"

    def __init__(self, quotient: FiniteQuotient, gens: Sequence, threshold: int = DEFAULT_BFS_THRESHOLD,
                 cache_dir=None):
        self.quotient = quotient
        self.table = cached_ball(quotient, gens, cache_dir=cache_dir, threshold=threshold)
        if quotient.order is not None and len(self.table) != quotient.order:
            raise BaseCaseError(f"generators reach {len(self.table)} of {quotient.order} elements")
        self.length_bound = self.table.radius

    def word(self, h) -> Word:
        try:
            return self.table.word(h)
        except KeyError:
            raise BaseCaseError("element not reachable from the generators") from None


class MitmBase:
    """Meet in the middle: match u^-1 h against a radius-L positive ball.

    Finds h whenever h lies in B(L) B(L); among all matches the one with the
    least total length wins (ties: the u discovered first).  Words have length
    at most 2L, which is the reported ``length_bound``.
    """

    name = "mitm"

    def __init__(self, quotient: FiniteQuotient, gens: Sequence, L: int, threshold: int = DEFAULT_BFS_THRESHOLD):
        self.quotient = quotient
        self.L = L
        self.table = DirectedBallTable(quotient, gens, radius=L, threshold=threshold)
        self.length_bound = 2 * L

    def word(self, h) -> Word:
        G, T = self.quotient, self.table
        best = None
        for i, u in enumerate(T.elements):
            j = T.index.get(G.key(G.mul(G.inv(u), h)))
            if j is not None:
                total = T.dist[i] + T.dist[j]
                if best is None or total < best[0]:
                    best = (total, i, j)
        if best is None:
            raise BaseCaseError(f"no match within radius {self.L}; raise L")
        return concat(T.word_at(best[1]), T.word_at(best[2]))


def _rank_insert(basis: list, pivots: list, v: np.ndarray, p: int):
    """Reduce v against an echelon basis mod p; append it if independent.  Returns the reduced vector."""
    v = v.copy() % p
    for b, c in zip(basis, pivots):
        if v[c]:
            v = (v - v[c] * b) % p
    nz = np.flatnonzero(v)
    if nz.size:
        c = int(nz[0])
        v = v * pow(int(v[c]), -1, p) % p
        return v, c
    return v, None


class LayeredBase:
    """Base words for Gamma/N_1 when a coarser quotient Q = Gamma/H is searchable and H/N_1 is elementary abelian.

    ``coarse`` is Q realised on the fine elements (its key forgets H/N_1),
    ``coords`` maps fine elements of H to vectors over F_p identifying
    H/N_1.  Words are ``w_Q(h) * prod_i c_i^{e_i}`` where w_Q comes from a BFS
    table of Q and the c_i are positive words landing in H whose coordinate
    vectors form a basis, taken from the products rep(x) s rep(y) that close
    up in Q.
    """

    name = "layered-bfs"

    def __init__(self, coarse: FiniteQuotient, fine: FiniteQuotient, gens: Sequence,
                 coords: Callable[[object], np.ndarray], p: int, dim: int,
                 threshold: int = DEFAULT_BFS_THRESHOLD):
        self.coarse, self.fine, self.coords, self.p = coarse, fine, coords, p
        self.table = DirectedBallTable(coarse, gens, threshold=threshold)
        if coarse.order is not None and len(self.table) != coarse.order:
            raise BaseCaseError("generators do not generate the coarse quotient")
        T = self.table
        inv_index = {}
        self.layer_words: list[Word] = []
        self.layer_vecs: list[np.ndarray] = []
        basis, pivots = [], []

        def consider(x_word, value):
            v = np.asarray(coords(value), dtype=np.int64) % p
            red, piv = _rank_insert(basis, pivots, v, p)
            if piv is None:
                return
            self.layer_words.append(x_word)
            self.layer_vecs.append(v)
            basis.append(red)
            pivots.append(piv)

        for i, x in enumerate(T.elements):
            if len(basis) == dim:
                break
            xi = fine.inv(x)
            kj = coarse.key(xi)
            j = inv_index.get(kj)
            if j is None:
                j = T.index[kj]
                inv_index[kj] = j
            consider(concat(T.word_at(i), T.word_at(j)), fine.mul(x, T.elements[j]))
            for s_idx, s in enumerate(gens):
                xs = fine.mul(x, s)
                j = T.index[coarse.key(fine.inv(xs))]
                consider(concat(T.word_at(i), Word.gen(s_idx), T.word_at(j)), fine.mul(xs, T.elements[j]))
        self.dim = len(self.layer_vecs)
        if self.dim < dim:
            raise BaseCaseError(f"layer vectors span only dimension {self.dim} of {dim}")
        self.length_bound = T.radius + (p - 1) * sum(w.length for w in self.layer_words)

    def _solve(self, v: np.ndarray) -> np.ndarray:
        """Exponents e with sum_i e_i layer_vecs[i] = v over F_p."""
        e = linalg.solve(np.array(self.layer_vecs, dtype=np.int64), v, self.p)
        if e is None:
            raise BaseCaseError("layer residue outside the span of the layer words")
        return e

    def word(self, h) -> Word:
        fine, T = self.fine, self.table
        i = T.index.get(self.coarse.key(h))
        if i is None:
            raise BaseCaseError("element not reachable from the generators")
        w = T.word_at(i)
        r = fine.mul(fine.inv(T.elements[i]), h)
        e = self._solve(np.asarray(self.coords(r), dtype=np.int64))
        return concat(w, *(self.layer_words[j] ** int(e[j]) for j in range(self.dim) if e[j]))
