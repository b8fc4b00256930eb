import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentskp.algebra import AlgebraError, Mat2, TruncPoly, commutator, det, mat_inv, mat_mul, mat_pow, val
from potentskp.groups import closure
from potentskp.oracle import exhaustive_residue_check, verify_hypotheses
from potentskp.sl2 import (ScheduleError, Sl2Instance, Sl2Quotient, Sl2Schedule, canonical_generators, gen_D, gen_E,
                           gen_F, make_schedule, parse_schedule, random_element, sl2_order, square_approx)


def poly(q, n, coeffs):
    return TruncPoly.from_coeffs(q, n, list(coeffs) + [0] * (n - len(coeffs)))


def squares_product(ys):
    out = Mat2.identity(ys[0].q, ys[0].n)
    for y in ys:
        out = mat_mul(out, mat_mul(y, y))
    return out


def test_D_E_F_generators():
    D = gen_D(1, 0, 2, 4)
    assert D == Mat2(poly(2, 4, [1]), poly(2, 4, [0, 1]), poly(2, 4, []), poly(2, 4, [1]))
    assert det(gen_E(2, [1, 1, 1], 4, 6)) == TruncPoly.one(4, 6)
    assert val(gen_F(2, [1, 1], 2, 6)) == 2
    with pytest.raises(AlgebraError):
        gen_D(2, 0, 2, 4)


def test_square_approx_identity():
    I = Mat2.identity(2, 8)
    ys = square_approx(I, 2)
    assert ys == (gen_D(2, 0, 2, 8), gen_E(2, 0, 2, 8), gen_F(2, 0, 2, 8))
    assert squares_product(ys) == I


def test_square_approx_swap_example():
    z = Mat2(poly(2, 4, [1]), poly(2, 4, [0, 0, 0, 1]), poly(2, 4, [0, 0, 0, 1]), poly(2, 4, [1]))
    ys = square_approx(z, 1)
    assert ys == (gen_D(1, 0, 2, 4), gen_E(1, 1, 2, 4), gen_F(1, 1, 2, 4))
    assert squares_product(ys) == z


def test_square_approx_rejects_shallow_input():
    with pytest.raises(AlgebraError):
        square_approx(canonical_generators(2, 4)[0], 1)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 4, 8]), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_square_approx_congruence(q, n, seed):
    m = 4 * n + 1
    z = random_element(q, m, np.random.default_rng(seed), min_level=3 * n)
    ys = square_approx(z, n)
    assert all(val(y) >= n for y in ys)
    assert val(mat_mul(squares_product(ys), mat_inv(z))) >= 4 * n


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_commutator_levels_add(n, m, seed):
    rng = np.random.default_rng(seed)
    g = random_element(2, 10, rng, min_level=n)
    h = random_element(2, 10, rng, min_level=m)
    assert val(commutator(g, h)) >= n + m
    assert val(mat_pow(g, 2)) >= min(2 * n, n + 1)


def test_schedules():
    assert list(make_schedule(2, 9, 9).betas) == [9, 12, 16, 20, 24, 32, 40, 52, 68]
    s = make_schedule(2, 3, 2)
    assert list(s.betas) == [3, 4] and list(s.alphas) == [1, 1]
    with pytest.raises(ScheduleError):
        make_schedule(2, 4, 2)
    assert Sl2Schedule.from_json(s.to_json()) == s
    assert parse_schedule("auto:9", 2, 20).betas[-1] == 20
    with pytest.raises(ScheduleError):
        Sl2Schedule(2, 4, (1, 1), (3, 5))


def test_schedule_file(tmp_path):
    s = make_schedule(4, 9, 3)
    p = tmp_path / "s.json"
    p.write_text(s.to_json())
    assert parse_schedule(str(p), 4) == s
    assert json.loads(s.to_json())["betas"] == [9, 12, 16]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_group_order_by_enumeration(m):
    G = Sl2Quotient(2, m)
    assert len(closure(G, canonical_generators(2, m))) == sl2_order(2, m) == G.order


def test_canonical_generators_q4():
    G = Sl2Quotient(4, 2)
    assert len(closure(G, canonical_generators(4, 2))) == sl2_order(4, 2)


def test_hypotheses_and_exhaustive_residues():
    inst = Sl2Instance(make_schedule(2, 9, 4))
    rep = verify_hypotheses(inst, [1, 2, 3], samples=20, seed=3)
    assert rep["ok"], rep
    small = Sl2Instance(make_schedule(2, 3, 2))
    assert exhaustive_residue_check(small, 1)["ok"]


def test_engine_bound_specializes():
    from potentskp.engine import level_bound
    inst = Sl2Instance(make_schedule(2, 9, 5))
    assert level_bound(inst, 17, 5) == 17 * 7**4
