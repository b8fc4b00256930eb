import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentskp import bounds as bnd
from potentskp.bases import BfsBase, MitmBase
from potentskp.engine import (BaseCaseError, BudgetExceeded, Evaluator, Navigator, Word, concat,
                              evaluate_letters, level_bound)
from potentskp.groups import CyclicGroup, ThresholdError, closure
from potentskp.oracle import DirectedBallTable, NotGeneratingError, cached_ball, directed_diameter
from potentskp.sl2 import Sl2Instance, Sl2Quotient, canonical_generators, make_schedule
from potentskp.treeauto import PortraitGroup


def words(ngens, depth=3):
    leaf = st.integers(0, ngens - 1).map(Word.gen) | st.just(Word.empty())
    return st.recursive(
        leaf,
        lambda inner: st.lists(inner, max_size=4).map(lambda ws: concat(*ws))
        | st.tuples(inner, st.integers(0, 4)).map(lambda t: t[0] ** t[1]),
        max_leaves=12,
    )


@settings(max_examples=100, deadline=None)
@given(words(3), words(3))
def test_word_length_and_positivity(u, v):
    letters = list(u.letters())
    assert len(letters) == u.length
    assert all(0 <= i < 3 for i in letters)
    assert (u + v).to_list() == u.to_list() + v.to_list()


@settings(max_examples=100, deadline=None)
@given(words(2))
def test_slp_round_trip_and_evaluation(w):
    assert Word.from_slp(w.to_slp()).to_list() == w.to_list()
    G = CyclicGroup(7)
    gens = [1, 3]
    assert Evaluator(G, gens)(w) == evaluate_letters(G, gens, w) == sum(gens[i] for i in w.to_list()) % 7


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        Word.gen(0) ** -1


def test_cyclic_ball_table():
    T = DirectedBallTable(CyclicGroup(3), [1])
    assert [T.word(g).to_list() for g in (0, 1, 2)] == [[], [0], [0, 0]]
    assert directed_diameter(CyclicGroup(3), [1]) == 2


def test_ball_table_save_load(tmp_path):
    G = CyclicGroup(5)
    T = cached_ball(G, [1, 2], cache_dir=tmp_path)
    again = cached_ball(G, [1, 2], cache_dir=tmp_path)
    assert np.array_equal(again.dist, T.dist) and len(list(tmp_path.iterdir())) == 1


def test_threshold_and_non_generating():
    with pytest.raises(ThresholdError):
        DirectedBallTable(PortraitGroup(4), PortraitGroup(4).generators())
    with pytest.raises(NotGeneratingError):
        directed_diameter(CyclicGroup(4), [2])


def test_sl2_k3_table_max_length_is_directed_diameter():
    G = Sl2Quotient(2, 3)
    gens = canonical_generators(2, 3)
    T = DirectedBallTable(G, gens)
    assert len(T) == 384
    assert max(T.word(g).length for g in T.elements) == T.radius


def test_mitm_finds_products_of_two_balls():
    G = Sl2Quotient(2, 3)
    gens = canonical_generators(2, 3)
    base = MitmBase(G, gens, L=3)
    full = DirectedBallTable(G, gens)
    for g in full.elements:
        if full.distance(g) <= 6:
            w = base.word(g)
            assert w.length <= 6 and G.eq(Evaluator(G, gens)(w), g)
    assert base.word(G.identity()).length == 0


def test_identity_navigates_to_empty_word():
    inst = Sl2Instance(make_schedule(2, 3, 2))
    gens = canonical_generators(2, 4)
    nav = Navigator(inst, gens, BfsBase(inst.base_quotient(), [inst.to_base(s) for s in gens]))
    res = nav.navigate(inst.group.identity())
    assert res.length == 0 and res.certified


def test_budget_guard():
    inst = Sl2Instance(make_schedule(2, 3, 2))
    gens = canonical_generators(2, 4)
    nav = Navigator(inst, gens, BfsBase(inst.base_quotient(), [inst.to_base(s) for s in gens]), max_calls=1)
    with pytest.raises(BudgetExceeded):
        nav.navigate(inst.sample_N(1, np.random.default_rng(0)))


def test_unreachable_base_raises():
    inst = Sl2Instance(make_schedule(2, 3, 2))
    gens = canonical_generators(2, 4)[:1]
    base = MitmBase(inst.base_quotient(), [inst.to_base(s) for s in gens], L=2)
    nav = Navigator(inst, gens, base)
    with pytest.raises(BaseCaseError):
        nav.navigate(canonical_generators(2, 4)[1])


def test_level_bound_matches_bound_l():
    inst = Sl2Instance(make_schedule(2, 3, 2))
    assert level_bound(inst, 384, 2) == bnd.bound_l(384, [3], [2]) == 384 * 7


def test_bound_examples():
    assert bnd.bound_l(384, [3, 3], [2, 2]) == 18816
    assert bnd.fg_period_products() == {"length_factor": 72272200, "branching_factor": 186200}
    assert bnd.padic_bound(3, 9, 3) == 36


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**6), st.lists(st.tuples(st.integers(1, 20), st.integers(1, 5)), max_size=12),
       st.integers(1, 6))
def test_improved_bound_never_exceeds_l(index, params, n0):
    A = [a for a, _ in params]
    k = [x for _, x in params]
    assert bnd.bound_L(index, A, k, n0) <= bnd.bound_l(index, A, k)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 50), st.lists(st.tuples(st.integers(1, 20), st.integers(1, 5)), min_size=1, max_size=8),
       st.integers(1, 5), st.integers(1, 40))
def test_runtime_recurrence_unrolls(f, params, S, index):
    A = [a for a, _ in params]
    k = [x for _, x in params]
    out = bnd.bound_runtime(f, A, k, S, index)
    t1 = f * S ** (index + 1)
    assert bnd.runtime_recurrence(t1, f, A, k)[-1] == out["recurrence"]
    if len(set(A)) == 1:
        assert out["recurrence"] == out["closed_form"]


def test_exponent_constants():
    c = bnd.exponent_constants()
    assert c["sl2_diameter_exponent"] == pytest.approx(math.log(7) / math.log(4 / 3))
    assert c["fg_gap_exponent"] == pytest.approx(2 * c["fg_diameter_exponent"])


def test_closure_of_cyclic():
    assert len(closure(CyclicGroup(6), [2])) == 3
