import numpy as np
import pytest

from potentskp import linalg
from potentskp.engine import Navigator, OracleError
from potentskp.fabgup import (STEP_TYPES, CoordinateError, FabGupInstance, UnitStep, ab_coords, chain_position,
                              k_coords, section_coords, unit_space, unit_tables, verify_unit_step, x1, x2)
from potentskp.oracle import exhaustive_residue_check, verify_hypotheses
from potentskp.treeauto import (Portrait, bold_word, gen_a, gen_b, place, place_array, pt_conj, pt_inv, pt_mul,
                                section_array, stab_level)


def test_abelianization_coordinates():
    assert ab_coords(gen_a(4)) == (1, 0)
    assert ab_coords(gen_b(4)) == (0, 1)
    assert ab_coords(x1(4)) == (0, 0)


def test_k_coordinates():
    assert k_coords(x1(3)) == (1, 0)
    assert k_coords(x2(3)) == (0, 1)
    assert k_coords(pt_conj(x1(3), gen_a(3))) == (1, 2)
    with pytest.raises(CoordinateError):
        k_coords(gen_a(3))


def test_section_coordinates():
    assert not section_coords(Portrait.identity(4), 1).any()
    assert list(section_coords(bold_word("0", x1(2)), 1)) == [1, 0, 0, 0, 0, 0]
    assert list(section_coords(bold_word("1", x1(2)), 1)) == [1, 0, 2, 0, 0, 0]
    with pytest.raises(CoordinateError):
        section_coords(gen_b(4), 1)


def test_chain_positions():
    c = chain_position(2)
    assert (c.A, c.M_level, c.place, c.e, c.unit) == (18, 0, 0, 3, "K10")
    c = chain_position(6)
    assert (c.A, c.M_level, c.place, c.e, c.unit) == (3, 2, 2, 1, "L")
    c1, c7 = chain_position(1), chain_position(7)
    assert (c7.A, c7.place, c7.M_level, c7.unit) == (c1.A, c1.place + 1, c1.M_level + 1, c1.unit)
    assert [STEP_TYPES[r].A for r in range(1, 7)] == [9, 18, 4, 6, 6, 3]


def test_unit_subspace_dimensions():
    dims = [unit_space(u, 2).shape[0] for u in ("K", "K10", "K20", "K1", "K2", "L", "1")]
    assert dims == [18, 17, 16, 15, 12, 9, 0]


def test_rs_indexing_resolves_consistently():
    # the span of tu(x1) with t + 3u >= 3 together with L^(x9) is K1^(x9)
    rows = [unit_space("L", 2)] + [section_coords(bold_word(f"{t}{u}", x1(2)), 2)[None]
                                    for t in range(3) for u in range(3) if t + 3 * u >= 3]
    span = np.concatenate(rows)
    both = np.concatenate([span, unit_space("K1", 2)])
    assert linalg.rank(span, 3) == linalg.rank(both, 3) == 15


@pytest.mark.parametrize("m", [1, 2])
def test_branch_layer_equals_level_stabilizer(m):
    rng = np.random.default_rng(m)
    inst = FabGupInstance(5)
    seen = set()
    for i in range(200):
        g = inst.sample_K(m - i % 2, rng)
        sectionwise = stab_level(g) >= m and all(
            ab_coords(Portrait(5 - m, row)) == (0, 0) for row in section_array(g, m))
        assert sectionwise == (stab_level(g) >= m + 1)
        seen.add(sectionwise)
    assert seen == {True, False}


@pytest.mark.parametrize("r", range(1, 7))
def test_unit_cube_identities(r):
    rep = verify_unit_step(r, STEP_TYPES[r].e + 3)
    assert rep["ok"], rep


@pytest.mark.parametrize("r", range(1, 7))
def test_unit_residue_classes_exhaustive(r):
    assert exhaustive_residue_check(UnitStep(r), 1)["ok"]


def test_cube_roots_for_01():
    unit = UnitStep(4)
    ys = unit.power_approx(bold_word("01", x1(2)), 1)
    e = Portrait.identity(4)
    X1 = x1(4)
    assert ys == [X1, pt_inv(pt_conj(X1, gen_b(4))), e, e, e, e]


def test_trivial_residue_gives_identities():
    inst = FabGupInstance(6)
    z = inst.sample_N(4, np.random.default_rng(0))
    assert all(y == Portrait.identity(6) for y in inst.power_approx(z, 3))


def test_residue_exponents_of_0x2():
    inst = FabGupInstance(6)
    z = place([bold_word("0", x2(3))] + [Portrait.identity(4)] * 8, 2)
    ex = inst.residue_exponents(z, 6)
    assert ex[0] == [1, 0, 0] and all(row == [0, 0, 0] for row in ex[1:])


@pytest.mark.parametrize("n", range(1, 13))
def test_residue_exponents_round_trip(n):
    inst = FabGupInstance(6)
    rng = np.random.default_rng(n)
    c = chain_position(n)
    _, G = unit_tables(c.r, 6 - c.place)
    combos = rng.integers(G.shape[0], size=3**c.place)
    z = pt_mul(place_array(G[combos], c.place), inst.sample_N(n + 1, rng))
    d = c.d
    expect = [[int(x) if x < 2 else -1 for x in ((k // 3**i) % 3 for i in range(d))] for k in combos]
    assert inst.residue_exponents(z, n) == expect


@pytest.mark.parametrize("n", range(1, 13))
def test_normality_of_chain(n):
    inst = FabGupInstance(6)
    a, b = gen_a(6), gen_b(6)
    for g in inst.residue_generators(n):
        assert inst.in_N(g, n)
        assert inst.in_N(pt_conj(g, a), n) and inst.in_N(pt_conj(g, b), n)
    rng = np.random.default_rng(n)
    for _ in range(10):
        z = inst.sample_N(n, rng)
        assert inst.in_N(pt_conj(z, a), n) and inst.in_N(pt_conj(z, b), n)


def test_hypotheses_first_two_periods():
    rep = verify_hypotheses(FabGupInstance(6), range(1, 13), samples=20, seed=5)
    assert rep["ok"], [lvl for lvl in rep["levels"] if not lvl["ok"]]


def test_oracle_rejects_input_outside_N():
    inst = FabGupInstance(6)
    with pytest.raises(OracleError):
        inst.power_approx(x1(6), 2)


def test_full_navigation_depth_5(fg_base):
    inst = FabGupInstance(5)
    nav = Navigator(inst, [gen_a(5), gen_b(5)], fg_base)
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = inst.sample_gamma(rng)
        res = nav.navigate(g)
        assert res.evaluation_ok and res.certified
        assert res.length <= res.bound


def test_layered_base_words(fg_base):
    from potentskp.engine import Evaluator
    from potentskp.treeauto import PortraitGroup
    inst = FabGupInstance(4)
    G = PortraitGroup(4)
    ev = Evaluator(G, [gen_a(4), gen_b(4)])
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = inst.sample_gamma(rng)
        w = fg_base.word(g)
        assert ev(w) == g and w.length <= fg_base.length_bound
