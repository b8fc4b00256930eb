import numpy as np
import pytest

from potentskp.groups import CyclicGroup, ThresholdError
from potentskp.sl2 import Sl2Quotient, canonical_generators
from potentskp.spectral import (DisconnectedError, cayley_graph, mixing_time_linf, spectral_report, spectrum,
                                undirected_diameter)
from potentskp.treeauto import PortraitGroup, gen_a, gen_b, pt_mul


def test_three_cycle_spectrum():
    g = cayley_graph(CyclicGroup(3), [1])
    assert g.valence == 2
    assert np.allclose(spectrum(g), [1.0, -0.5, -0.5], atol=1e-12)
    rep = spectral_report(CyclicGroup(3), [1])
    assert abs(rep.gap - 1.5) < 1e-12 and rep.diameter == 1


def test_cycle_spectrum_matches_cosines():
    n = 11
    ev = np.sort(spectrum(cayley_graph(CyclicGroup(n), [1])))
    assert np.allclose(ev, np.sort(np.cos(2 * np.pi * np.arange(n) / n)))


def test_trivial_group():
    rep = spectral_report(CyclicGroup(1), [0])
    assert rep.order == 1 and rep.diameter == 0 and rep.mixing_time == 0


def test_adjacency_is_symmetric_stochastic():
    G = PortraitGroup(2)
    A = cayley_graph(G, [gen_a(2), gen_b(2)]).adjacency().toarray()
    assert np.allclose(A, A.T) and np.allclose(A.sum(axis=1), 1.0)


def test_fg_level_two():
    rep = spectral_report(PortraitGroup(2), [gen_a(2), gen_b(2)])
    assert rep.order == 81 and rep.valence == 4 and rep.diameter == 6
    assert rep.gap_ok and rep.mixing_ok and rep.spectrum_ok
    assert rep.gap == pytest.approx(0.1376, abs=1e-4)


def test_sl2_three_levels():
    G = Sl2Quotient(2, 3)
    rep = spectral_report(G, canonical_generators(2, 3))
    assert rep.order == 384
    assert rep.gap_ok and rep.mixing_ok and rep.spectrum_ok


def test_sparse_path_agrees_with_dense():
    from potentskp import spectral
    G = Sl2Quotient(2, 3)
    graph = cayley_graph(G, canonical_generators(2, 3))
    dense = spectrum(graph)[:2]
    old = spectral.DENSE_LIMIT
    spectral.DENSE_LIMIT = 10
    try:
        sparse = spectrum(graph)
    finally:
        spectral.DENSE_LIMIT = old
    assert np.allclose(dense, sparse, atol=1e-8)


def test_disconnected_generators():
    with pytest.raises(DisconnectedError):
        cayley_graph(CyclicGroup(6), [2])


def test_threshold():
    with pytest.raises(ThresholdError):
        cayley_graph(PortraitGroup(3), [gen_a(3), gen_b(3)], threshold=100)


def test_mixing_not_below_diameter():
    G = PortraitGroup(2)
    a, b = gen_a(2), gen_b(2)
    graph = cayley_graph(G, [a, pt_mul(a, b)])
    assert mixing_time_linf(graph) >= undirected_diameter(graph)
