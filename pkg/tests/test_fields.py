import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympfact import fields
from sympfact.fields import (
    NotFound,
    T2_LISTED,
    VField,
    build_gamma,
    build_phi,
    build_theta,
    classify_triples,
    d_field,
    governing_field,
    pattern_triples,
    level,
    make_triple,
    omega_rank,
    r_minor,
    r_minor_direct,
    regen_tables,
    spanning_check,
    stacked_rank,
    xi_set,
    z2z3_witness,
)
from sympfact.polycore import MPoly, exact_rank, parse_poly, var_from_name
from sympfact.strata import FiberPoint, all_vars, random_point

V = var_from_name


def test_d_field_table_row():
    P = level(2).P
    f = d_field(P[2], P[3], make_triple("w1", "w2", "w3"))
    assert f.coeff(V("w1")) == parse_poly("z3^2")
    assert f.coeff(V("w2")) == parse_poly("-z2*z3")
    assert f.coeff(V("w3")) == parse_poly("z2^2")
    g = d_field(P[2], P[3], make_triple("z2", "z3", "w1"))
    assert g.coeff(V("w1")).render() == "w1*w3 - w2^2"


def test_d_field_repeated_row_is_zero():
    P = level(3).P
    assert d_field(P[0], P[0], make_triple("z2", "w1", "z4")).is_zero()


names = ["z2", "z3", "w1", "w2", "w3"]
small = st.lists(st.tuples(st.integers(-3, 3), st.sampled_from(names), st.sampled_from(names)), min_size=1, max_size=4)


def _poly(terms):
    return sum((MPoly.const(c) * MPoly.var(V(a)) * MPoly.var(V(b)) for c, a, b in terms), MPoly())


@settings(max_examples=40)
@given(small, small, st.sets(st.sampled_from(names), min_size=3, max_size=3))
def test_d_field_annihilates_its_pair(p, q, t):
    P, Q = _poly(p), _poly(q)
    f = d_field(P, Q, make_triple(*t))
    assert f.apply(P).is_zero() and f.apply(Q).is_zero()


@pytest.mark.parametrize("K", [2, 3, 4, 5, 6])
def test_governing_fields_are_tangent(K):
    i, j = fields.governing_pair(K)
    lv = level(K)
    for t in sorted(classify_triples(K))[:15]:
        f = governing_field(K, t)
        assert f.apply(lv.P[i - 1]).is_zero() and f.apply(lv.P[j - 1]).is_zero()


def test_triple_validation():
    with pytest.raises(ValueError):
        make_triple("z1", "z2", "z3")
    with pytest.raises(ValueError):
        make_triple("z2", "z2", "z3")


def test_base_set_has_seven_triples():
    assert classify_triples(2) == T2_LISTED
    assert make_triple("z2", "z3", "z4") in classify_triples(3)
    with pytest.raises(ValueError):
        classify_triples(1)


def test_sizes_and_chain():
    # sizes frozen from an independent sympy enumeration of the degree test
    assert [len(classify_triples(K)) for K in range(2, 7)] == [7, 24, 51, 88, 135]
    for K in range(3, 7):
        assert classify_triples(K - 1) <= classify_triples(K)


@pytest.mark.parametrize("K", [2, 3, 4, 5, 6])
def test_union_patterns_agree_with_degree_test(K):
    assert pattern_triples(K) == classify_triples(K)


def test_xi_sets():
    assert xi_set(3) == T2_LISTED
    assert xi_set(4) == classify_triples(3) - classify_triples(2)
    assert not (xi_set(5) & T2_LISTED)
    with pytest.raises(ValueError):
        xi_set(2)


@pytest.mark.parametrize("row,values", [
    ("z2 w2 w3", ["0", "z3^2", "0", "0"]),
    ("w1 w2 w3", ["0", "0", "0", "0"]),
    ("z2 z3 w1", ["z2*w2", "-z2*w3", "0", "z2"]),
])
def test_r_minor_table_rows(row, values):
    t = make_triple(*row.split())
    assert [r_minor(2, t, j) for j in range(1, 5)] == [parse_poly(v) for v in values]


def test_r_minor_rejects_bad_row():
    with pytest.raises(ValueError):
        r_minor(2, make_triple("z2", "z3", "w1"), 5)


def test_r_level_three_identity_both_routes():
    lv2 = level(2)
    for t in fields._old_triples(3):
        d = governing_field(2, t)
        assert r_minor(3, t, 1) == d.apply(lv2.P[1]) == r_minor_direct(3, t, 1)
        assert r_minor(3, t, 2) == d.apply(lv2.P[0])


def test_r_identities_and_recursions_to_level_four():
    assert fields.verify_r_identities(4).ok
    rep = fields.verify_r_recursions(4)
    assert rep.ok and rep.checked > 0
    with pytest.raises(ValueError):
        fields.verify_r_recursions(2)


def test_recursion_spot_check_two_to_three():
    t = make_triple("z2", "z3", "w1")
    M = fields.r_recursion_matrix(2)
    low = [r_minor(2, t, j) for j in range(1, 5)]
    pred = [sum((M[r][c] * low[c] for c in range(4)), MPoly()) for r in range(4)]
    assert pred == [r_minor(3, t, j) for j in range(1, 5)]


def test_gamma_four():
    P = level(3).P
    g = build_gamma(4)
    assert g.coeff(V("w6")) == P[0] * P[0]
    assert g.coeff(V("w4")) == P[1] * P[1]
    assert g.coeff(V("w5")) == -(P[0] * P[1])


def test_gamma_odd_kills_first_row():
    P3 = level(3).P
    assert build_gamma(3).apply(P3[0]).is_zero()


def test_theta_requires_triple_from_this_level():
    t_old = make_triple("w1", "w2", "w3")
    build_theta(3, t_old)
    with pytest.raises(ValueError):
        build_theta(4, t_old)
    build_theta(4, t_old, strict=False)


@pytest.mark.parametrize("K", [3, 4])
def test_theta_phi_tangent_with_negated_signs(K):
    for t in sorted(xi_set(K))[:6]:
        for build in (build_theta, build_phi):
            f = build(K, t)
            assert all(f.apply(p).is_zero() for p in level(K).P)
            assert all(f.apply(p).is_zero() for p in level(K + 1).P)
            assert f.expand().apply(level(K).P[0]) == f.apply(level(K).P[0])


def test_printed_signs_are_not_tangent():
    t = make_triple("z2", "z3", "w1")
    f = build_theta(3, t, printed_signs=True)
    assert not f.apply(level(3).P[0]).is_zero()
    assert fields.sign_conformance(3) == {"printed": False, "negated": True}


def test_tangency_suite_and_negative_control():
    assert fields.tangency_suite(4).ok
    bad = fields.tangency_suite(3, inject_sign_flip=True)
    assert not bad.ok
    assert any(f["case"].startswith("theta") for f in bad.failures)


def test_omega_rank_examples():
    rng = random.Random(5)
    assert omega_rank(4, random_point(4, 2, rng)) == 2
    zero = {v: Fraction(0) for v in all_vars(3, 2)}
    assert omega_rank(3, zero) == 0


def test_rank_stability_small():
    rep = fields.rank_stability_suite(10, seed=3, kmax=5)
    assert rep.ok


def test_stacked_rank_is_level_independent():
    pt = random_point(6, 2, random.Random(11))
    pt[V("z2")] = Fraction(0)
    ranks = {stacked_rank(2, L, pt) for L in range(2, 7)}
    assert len(ranks) == 1


def test_spanning_examples():
    pt = random_point(4, 2, random.Random(7))
    rep = spanning_check(4, pt)
    assert rep.ok and rep.checked == 1
    pt[V("z2")] = Fraction(0)
    skipped = spanning_check(4, pt)
    assert skipped.checked == 0 and "precondition" in skipped.notes


def test_spanning_projection_matches_expanded_fields():
    K = 4
    pt = random_point(K, 2, random.Random(9))
    vecs = fields.new_direction_vectors(K, pt)
    new = fields._new_vars(K)
    expected = [tuple(build_gamma(K).coeff(v).evaluate(pt) for v in new)]
    for t in sorted(classify_triples(K - 1)):
        for build in (build_theta, build_phi):
            f = build(K, t, strict=False)
            expected.append(tuple(f.coeff(v).evaluate(pt) for v in new))
    assert [tuple(Fraction(x) for x in v) for v in vecs] == expected


def test_escape_direction_at_z2_zero():
    f = governing_field(2, make_triple("z2", "w2", "w3"))
    assert f.coeff(V("z2")) == parse_poly("z3^2")


def test_level_two_good_set_span():
    rng = random.Random(13)
    ts = [make_triple(*s.split()) for s in ("z3 w1 w3", "z2 w1 w3", "w1 w2 w3")]
    order = level(2).vars
    for _ in range(20):
        pt = random_point(2, 2, rng)
        if pt[V("z2")] * pt[V("z3")] == 0:
            continue
        rows = [[governing_field(2, t).coeff(v).evaluate(pt) for v in order] for t in ts]
        assert exact_rank(rows) == 3


def test_witnesses():
    fp = z2z3_witness(5, [1, 2, 3, 4])
    assert isinstance(fp, FiberPoint) and fp.is_consistent()
    assert fp.value(V("z2")) * fp.value(V("z3")) != 0
    assert isinstance(z2z3_witness(3, [1, 0, 0, 0]), NotFound)
    assert isinstance(z2z3_witness(3, [0, 2, 0, 0]), NotFound)
    assert isinstance(z2z3_witness(3, [1, 1, 0, 1], component="A1"), NotFound)
    assert isinstance(z2z3_witness(3, [1, 1, 0, 1]), FiberPoint)


def test_tables_agree_except_known_errata():
    tables = regen_tables()
    bad = [c for cells in tables.values() for c in cells if not c.matches]
    assert {(c.table, c.row, c.col) for c in bad} == set(fields.KNOWN_ERRATA)
    assert all(c.confirmed_erratum for c in bad)
    for cells in tables.values():
        assert all(c.computed == c.alt for c in cells)


def test_table_cells_quoted_examples():
    tables = regen_tables()
    cell = {(c.row, c.col): c for c in tables["table3"]}
    assert cell[("P3", "d/dz5")].computed == parse_poly("w4")
    assert cell[("P1", "d/dz2")].computed == parse_poly("1 + w1*z4")
    t1 = {(c.row, c.col): c.computed for c in tables["table1"]}
    assert [t1[("(z2,z3,w3)", f"d/d{v}")] for v in ("z2", "w1", "w2", "w3")] == \
        [parse_poly(s) for s in ("w2*z3", "0", "0", "w1*w3 - w2^2")]


def test_corrupted_cell_is_named():
    printed = [r[:] for r in fields.TABLE2_PRINTED]
    printed[0][0] = "z2"
    diff = fields.table_diff({"table2": regen_tables(printed2=printed)["table2"]})
    assert diff == [{"table": "table2", "cell": "(w1,w2,w3) R1", "printed": "z2", "computed": "0",
                     "status": "mismatch", "check": "differs from the directly expanded determinant"}]


def test_vfield_algebra():
    x, y = V("z2"), V("w1")
    f = VField({x: MPoly.var(y), y: MPoly()})
    assert list(f.coeffs) == [x]
    g = f + VField({x: -MPoly.var(y)})
    assert g.is_zero()
    assert f.scale(MPoly.const(2)).apply(MPoly.var(x) ** 2) == parse_poly("4*z2*w1")


def test_r_minors_level_three_frozen():
    # frozen from an independent sympy determinant of the level-3 gradient matrix
    t = make_triple("z2", "z3", "z4")
    expected = [
        "0",
        "w1^2*w3*z2 - w1*w2^2*z2 + w1*w2*w3*z3 - w2^3*z3",
        "w1^2*w3*z2*z5 - w1*w2^2*z2*z5 + w1*w2*w3*z3*z5 - w1*w2*z2 - w2^3*z3*z5 - w2^2*z3",
        "-w1^2*w3*z2*z6 - w1^2*z2 + w1*w2^2*z2*z6 - w1*w2*w3*z3*z6 - w1*w2*z3 + w2^3*z3*z6",
    ]
    assert [r_minor(3, t, j) for j in range(1, 5)] == [parse_poly(e) for e in expected]
