import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from potentskp.fabgup import x1, x2
from potentskp.groups import closure
from potentskp.treeauto import (Portrait, PortraitError, PortraitGroup, assemble, bold, gen_a, gen_b, place,
                                pt_comm, pt_conj, pt_from_str, pt_inv, pt_mul, pt_pow, pt_to_str, quotient_order,
                                sections, stab_level)


def raw_portraits(m):
    n = (3**m - 1) // 2
    return st.lists(st.integers(0, 2), min_size=n, max_size=n).map(lambda ls: Portrait(m, ls))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7), st.data())
def test_group_axioms(m, data):
    f, g, h = (data.draw(raw_portraits(min(m, 5))) for _ in range(3))
    assert pt_mul(pt_mul(f, g), h) == pt_mul(f, pt_mul(g, h))
    assert pt_mul(f, pt_inv(f)) == Portrait.identity(f.depth)
    assert pt_conj(f, g) == pt_mul(pt_mul(pt_inv(g), f), g)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.data())
def test_wreath_recursion_is_a_homomorphism(m, data):
    f, g = data.draw(raw_portraits(m)), data.draw(raw_portraits(m))
    rf, rg = int(f.labels[0]), int(g.labels[0])
    fs = [Portrait(m - 1, s) for s in _sections_any(f)]
    gs = [Portrait(m - 1, s) for s in _sections_any(g)]
    # (fg)_x = f_x g_{x + r_f}
    expect = [pt_mul(fs[x], gs[(x + rf) % 3]) for x in range(3)]
    assert [Portrait(m - 1, s) for s in _sections_any(pt_mul(f, g))] == expect
    assert pt_mul(f, g).labels[0] == (rf + rg) % 3


def _sections_any(g):
    from potentskp.treeauto import section_array
    return list(section_array(g, 1))


def test_generators():
    assert pt_mul(gen_a(4), pt_mul(gen_a(4), gen_a(4))) == Portrait.identity(4)
    assert pt_pow(gen_b(4), 3) == Portrait.identity(4)
    assert list(gen_a(2).labels) == [1, 0, 0, 0]
    assert sections(gen_b(3))[2] == gen_b(2)
    assert sections(gen_b(3))[0] == gen_a(2)
    assert gen_b(1).labels[0] == 0
    assert pt_inv(Portrait.identity(3)) == Portrait.identity(3)


def test_section_tuples_of_commutators():
    A, B = gen_a(4), gen_b(4)
    a, b = gen_a(3), gen_b(3)
    assert sections(pt_comm(A, B)) == (pt_mul(pt_inv(b), a), pt_inv(a), b)
    assert sections(pt_comm(A, pt_comm(A, B))) == (pt_mul(b, a), pt_mul(pt_mul(pt_inv(a), b), pt_inv(a)), pt_mul(a, b))
    assert sections(pt_mul(B, B)) == (pt_pow(a, 2), Portrait.identity(3), pt_pow(b, 2))


def test_sections_and_assemble():
    e = Portrait.identity(3)
    assert sections(Portrait.identity(4)) == (e, e, e)
    x = x1(3)
    assert assemble((x, pt_inv(x), e), 0) == bold(1, x)
    with pytest.raises(PortraitError):
        sections(gen_a(3))
    with pytest.raises(PortraitError):
        pt_mul(gen_a(3), gen_a(4))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.data())
def test_assemble_inverts_sections_and_stab_level(m, data):
    g = data.draw(raw_portraits(m))
    arr = g.labels.copy()
    arr[0] = 0
    g = Portrait(m, arr)
    parts = sections(g)
    assert assemble(parts, 0) == g
    assert stab_level(g) == min(m, 1 + min(stab_level(p) for p in parts))


def test_stab_level_examples():
    assert stab_level(Portrait.identity(5)) == 5
    assert stab_level(gen_a(5)) == 0
    assert stab_level(x1(5)) == 1


def test_quotient_orders_by_closure():
    for m in (1, 2, 3):
        assert len(closure(PortraitGroup(m), PortraitGroup(m).generators())) == quotient_order(m)
    assert quotient_order(2) == 81 and quotient_order(3) == 59049


def test_serialization():
    g = pt_comm(gen_a(3), gen_b(3))
    assert pt_from_str(pt_to_str(g)) == g
    with pytest.raises(PortraitError):
        pt_from_str("3:0120")
    with pytest.raises(PortraitError):
        pt_from_str("abc")


def test_place_puts_sections_at_level():
    parts = [x1(2) if i == 4 else Portrait.identity(2) for i in range(9)]
    g = place(parts, 2)
    assert stab_level(g) == 3
    assert sections(sections(g)[1])[1] == x1(2)


def test_key_depth_quotient():
    G = PortraitGroup(4, key_depth=3)
    assert G.order == 59049
    deep = place([x1(2)] + [Portrait.identity(2)] * 8, 2).truncate(4)
    assert G.is_identity(deep) and not PortraitGroup(4).is_identity(deep)
    assert not PortraitGroup(4).is_identity(x2(4))
