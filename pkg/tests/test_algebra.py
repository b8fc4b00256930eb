import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentskp.algebra import (AlgebraError, GF2m, Mat2, TruncPoly, det, field, is_sl2, mat_from_str, mat_inv,
                               mat_mul, mat_pow, mat_to_str, tp_add, tp_from_str, tp_inv, tp_mul, tp_to_str, val)
from potentskp.sl2 import random_element


def poly(q, coeffs):
    return TruncPoly.from_coeffs(q, len(coeffs), coeffs)


def test_inverse_of_one_plus_t():
    assert tp_inv(poly(2, [1, 1, 0])) == poly(2, [1, 1, 1])


def test_truncation_kills_high_degree():
    t, t2 = TruncPoly.monomial(2, 3, 1), TruncPoly.monomial(2, 3, 2)
    assert tp_mul(t, t2).is_zero()


def test_inverse_checked_by_multiplication():
    x = poly(2, [1, 1, 0, 1, 0])
    assert tp_mul(tp_inv(x), x) == TruncPoly.one(2, 5)


def test_non_unit_and_mismatch_raise():
    with pytest.raises(AlgebraError):
        tp_inv(TruncPoly.monomial(2, 3, 1))
    with pytest.raises(AlgebraError):
        tp_add(TruncPoly.one(2, 3), TruncPoly.one(2, 4))


def test_field_tables():
    F = field(4)
    assert isinstance(F, GF2m)
    for x in range(1, 4):
        assert F.mul(x, F.inv(x)) == 1
    with pytest.raises(AlgebraError):
        field(6)


def test_serialization_round_trip():
    x = poly(4, [3, 0, 1, 2])
    assert tp_from_str(tp_to_str(x), 4) == x
    g = random_element(4, 3, __import__("numpy").random.default_rng(1))
    assert mat_from_str(mat_to_str(g), 4) == g


def test_level_of_congruence_element():
    one, zero = TruncPoly.one(2, 6), TruncPoly.zero(2, 6)
    g = Mat2(one, TruncPoly.monomial(2, 6, 4), zero, one)
    assert val(g) == 4
    assert val(Mat2.identity(2, 6)) == 6


def elements(q, n):
    return st.integers(0, 2**32 - 1).map(lambda s: random_element(q, n, __import__("numpy").random.default_rng(s)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 4, 8]), st.integers(1, 6), st.data())
def test_group_axioms(q, n, data):
    g, h, k = (data.draw(elements(q, n)) for _ in range(3))
    assert is_sl2(g) and is_sl2(mat_mul(g, h))
    assert mat_mul(mat_mul(g, h), k) == mat_mul(g, mat_mul(h, k))
    assert mat_mul(g, mat_inv(g)) == Mat2.identity(q, n)
    assert det(mat_pow(g, 5)) == TruncPoly.one(q, n)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 4]), st.integers(1, 8), st.data())
def test_ring_laws(q, n, data):
    coeffs = st.lists(st.integers(0, q - 1), min_size=n, max_size=n)
    x, y, z = (poly(q, data.draw(coeffs)) for _ in range(3))
    assert tp_mul(x, tp_add(y, z)) == tp_add(tp_mul(x, y), tp_mul(x, z))
    assert tp_mul(x, y) == tp_mul(y, x)
    if x.coeffs[0]:
        assert tp_mul(x, tp_inv(x)) == TruncPoly.one(q, n)
