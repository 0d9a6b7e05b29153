from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympfact.polycore import MPoly, VarId, exact_rank, parse_poly, poly_det, var_from_name, var_name

VARS = [var_from_name(n) for n in ("z1", "z2", "z3", "w1", "w2", "w3", "z4")]

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=3)
monomials = st.lists(st.tuples(st.sampled_from(VARS), st.integers(0, 3)), max_size=3)
polys = st.lists(st.tuples(coeffs, monomials), max_size=4).map(
    lambda ts: sum((MPoly.const(c) * _mono(m) for c, m in ts), MPoly()))
points = st.fixed_dictionaries({v: st.fractions(min_value=-3, max_value=3, max_denominator=4) for v in VARS})


def _mono(m):
    out = MPoly.const(1)
    for v, e in m:
        out = out * MPoly.var(v) ** e
    return out


def test_flat_names_round_trip():
    assert var_name(VarId(1, 1, 2)) == "z2"
    assert var_name(VarId(2, 1, 1)) == "w1"
    assert var_name(VarId(3, 2, 2)) == "z6"
    assert var_name(VarId(6, 1, 2)) == "w8"
    for v in VARS:
        assert var_from_name(var_name(v)) == v


def test_varid_make_sorts_position():
    assert VarId.make(1, 2, 1) == VarId(1, 1, 2)


def test_render_canonical():
    assert parse_poly("w1*w3 - w2^2").render() == "w1*w3 - w2^2"
    assert parse_poly("z3*w2 + w1*z2").render() == "z2*w1 + z3*w2"
    assert parse_poly("3/2*z2").render() == "3/2*z2"
    assert MPoly().render() == "0"
    assert parse_poly("-(z2 - 1)").render() == "-z2 + 1"


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_poly("z2 +* w1")


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a - a == MPoly()


@given(polys, polys, st.sampled_from(VARS))
def test_leibniz(a, b, v):
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@settings(deadline=None)
@given(polys, polys, points)
def test_evaluation_is_a_homomorphism(a, b, pt):
    assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)
    assert (a + b).evaluate(pt) == a.evaluate(pt) + b.evaluate(pt)


@given(polys)
def test_render_parse_round_trip(a):
    assert parse_poly(a.render()) == a


@settings(max_examples=30)
@given(polys, polys)
def test_exact_division(a, b):
    if b.is_zero():
        return
    assert (a * b).exact_div(b) == a


def test_inexact_division_raises():
    with pytest.raises(ArithmeticError):
        parse_poly("z2 + 1").exact_div(parse_poly("z2"))


def test_degree():
    p = parse_poly("z2^3*w1 + z2")
    assert p.degree(var_from_name("z2")) == 3
    assert p.degree(var_from_name("w3")) == 0
    assert MPoly().degree(var_from_name("z2")) == -1


def test_det_2x2_symmetric_block():
    w1, w2, w3 = (MPoly.var(var_from_name(n)) for n in ("w1", "w2", "w3"))
    assert poly_det([[w1, w2], [w2, w3]]).render() == "w1*w3 - w2^2"


small_polys = st.lists(st.tuples(coeffs, monomials), max_size=2).map(
    lambda ts: sum((MPoly.const(c) * _mono(m) for c, m in ts), MPoly()))


@settings(max_examples=15, deadline=None)
@given(st.lists(small_polys, min_size=16, max_size=16))
def test_bareiss_matches_laplace(entries):
    m = [entries[4 * i:4 * i + 4] for i in range(4)]

    def laplace(mat):
        if len(mat) == 1:
            return mat[0][0]
        acc = MPoly()
        for j, x in enumerate(mat[0]):
            minor = [r[:j] + r[j + 1:] for r in mat[1:]]
            term = x * laplace(minor)
            acc = acc + term if j % 2 == 0 else acc - term
        return acc

    assert poly_det(m) == laplace(m)


def test_det_rejects_non_square():
    with pytest.raises(ValueError):
        poly_det([[MPoly.const(1), MPoly()]])


def test_exact_rank():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_rank([[Fraction(1, 3), 0], [0, 1]]) == 2
    assert exact_rank([[0, 0], [0, 0]]) == 0
