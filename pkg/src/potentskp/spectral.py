"""Spectral gap, undirected diameter and l-infinity mixing time of small Cayley graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .groups import FiniteQuotient, ThresholdError

DENSE_LIMIT = 2000
DEFAULT_SPECTRAL_THRESHOLD = 10**6


class DisconnectedError(ValueError):
    """S does not generate the group, so the Cayley graph is disconnected."""


@dataclass
class CayleyGraph:
    """Right-multiplication Cayley graph on the symmetrized set S u S^-1."""

    order: int
    valence: int  # |S u S^-1|
    neighbors: np.ndarray  # (order, valence) vertex indices; vertex 0 is the identity

    def adjacency(self) -> sp.csr_matrix:
        """Normalized adjacency A_S = (1/|S u S^-1|) sum_s R_s, symmetric."""
        n, v = self.neighbors.shape
        rows = np.repeat(np.arange(n), v)
        A = sp.csr_matrix((np.full(n * v, 1.0 / v), (rows, self.neighbors.ravel())), shape=(n, n))
        return A


def cayley_graph(G: FiniteQuotient, gens: Sequence, threshold: int = DEFAULT_SPECTRAL_THRESHOLD,
                 order: int | None = None) -> CayleyGraph:
    sym, seen = [], set()
    for s in list(gens) + [G.inv(s) for s in gens]:
        k = G.key(s)
        if k not in seen:
            seen.add(k)
            sym.append(s)
    e = G.identity()
    index = {G.key(e): 0}
    elems = [e]
    nbrs: list[list[int]] = []
    i = 0
    while i < len(elems):
        g = elems[i]
        row = []
        for s in sym:
            h = G.mul(g, s)
            k = G.key(h)
            j = index.get(k)
            if j is None:
                j = index[k] = len(elems)
                elems.append(h)
                if len(elems) > threshold:
                    raise ThresholdError(f"Cayley graph exceeds {threshold} vertices")
            row.append(j)
        nbrs.append(row)
        i += 1
    expected = G.order if order is None else order
    if expected is not None and len(elems) != expected:
        raise DisconnectedError(f"generators reach {len(elems)} of {expected} elements")
    return CayleyGraph(len(elems), len(sym), np.array(nbrs, dtype=np.int64).reshape(len(elems), len(sym)))


def spectrum(graph: CayleyGraph, k: int | None = None) -> np.ndarray:
    """Eigenvalues of A_S in decreasing order (all of them for dense sizes, else the top k)."""
    A = graph.adjacency()
    if graph.order <= DENSE_LIMIT:
        return np.linalg.eigvalsh(A.toarray())[::-1]
    vals = eigsh(A, k=k or 2, which="LA", tol=1e-12, return_eigenvectors=False)
    return np.sort(vals)[::-1]


def undirected_diameter(graph: CayleyGraph) -> int:
    dist = np.full(graph.order, -1, np.int64)
    dist[0] = 0
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for w in graph.neighbors[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                dq.append(w)
    if (dist < 0).any():
        raise DisconnectedError("Cayley graph is disconnected")
    return int(dist.max())


def mixing_time_linf(graph: CayleyGraph, max_steps: int = 10**6) -> int:
    """First l with max_x |T^l delta_e(x) - 1/|G|| <= 1/(2|G|), T = (A_S + I)/2."""
    n = graph.order
    A = graph.adjacency()
    p = np.zeros(n)
    p[0] = 1.0
    u = 1.0 / n
    for l in range(max_steps + 1):
        if np.abs(p - u).max() <= 0.5 * u:
            return l
        # A is symmetric, so the row and column walk agree
        p = 0.5 * (A @ p + p)
        if abs(p.sum() - 1.0) > 1e-12:
            raise ArithmeticError("walk lost stochasticity")
    raise ThresholdError(f"no mixing within {max_steps} steps")


@dataclass
class SpectralReport:
    group: str
    order: int
    S_size: int
    valence: int
    lambda_1: float
    lambda_2: float
    lambda_min: float
    gap: float
    diameter: int
    dsc_bound: float
    mixing_time: int
    gap_ok: bool
    mixing_ok: bool
    spectrum_ok: bool

    def to_record(self) -> dict:
        return asdict(self)


def spectral_report(G: FiniteQuotient, gens: Sequence, threshold: int = DEFAULT_SPECTRAL_THRESHOLD,
                    order: int | None = None) -> SpectralReport:
    """Spectrum, gap, diameter and mixing time, with the gap >= (2 |S u S^-1| diam^2)^-1 and mixing >= diam checks."""
    graph = cayley_graph(G, gens, threshold, order)
    ev = spectrum(graph)
    lam1 = float(ev[0])
    lam2 = float(ev[1]) if ev.size > 1 else float("-inf")
    lam_min = float(ev[-1])
    gap = 1.0 - lam2 if ev.size > 1 else 1.0
    diam = undirected_diameter(graph)
    bound = 1.0 / (2 * graph.valence * diam**2) if diam else 0.0
    mix = mixing_time_linf(graph)
    tol = 1e-9
    return SpectralReport(
        group=G.describe(), order=graph.order, S_size=len(gens), valence=graph.valence,
        lambda_1=lam1, lambda_2=lam2, lambda_min=lam_min, gap=gap, diameter=diam, dsc_bound=bound,
        mixing_time=mix, gap_ok=gap >= bound - tol, mixing_ok=mix >= diam,
        spectrum_ok=bool(abs(lam1 - 1) <= tol and lam_min >= -1 - tol and ev.max() <= 1 + tol),
    )
