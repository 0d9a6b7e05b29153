import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sympfact.factor import (
    FactorizationError,
    exp_factorization,
    exp_nilpotent,
    factor_sl2,
    factor_sp4,
    merge_factors,
    product_of,
    random_elementary_product,
    sl2_product,
)
from sympfact.symgroup import ElemFactor, Parity, is_symplectic

entries = st.floats(min_value=-3, max_value=3, allow_nan=False)


def test_sl2_identity_and_transvection():
    assert factor_sl2(np.eye(2)) == []
    assert factor_sl2([[1, 2.5], [0, 1]]) == [(False, 2.5)]
    assert factor_sl2([[1, 0], [-4, 1]]) == [(True, -4)]


def test_sl2_diagonal_needs_four():
    m = np.array([[2, 0], [0, 0.5]])
    ts = factor_sl2(m)
    assert len(ts) == 4
    assert np.abs(sl2_product(ts) - m).max() <= 1e-12


def test_sl2_rejects_non_unimodular():
    with pytest.raises(FactorizationError):
        factor_sl2([[2, 0], [0, 1]])


@given(entries, entries, entries)
def test_sl2_round_trip(a, b, c):
    if abs(a) < 1e-2:
        return
    m = np.array([[a, b], [c, (1 + b * c) / a]])
    ts = factor_sl2(m)
    assert len(ts) <= 4
    assert np.linalg.norm(sl2_product(ts) - m) <= 1e-9 * max(1.0, np.linalg.norm(m)) ** 2


def test_identity_gives_no_factors():
    res = factor_sp4(np.eye(4))
    assert res.count == 0 and res.residual == 0


def test_single_lower_factor():
    A = ElemFactor(Parity.LOWER, [[1, 2], [2, 3]]).to_numpy()
    res = factor_sp4(A)
    assert res.residual <= 1e-12


def test_non_symplectic_input():
    with pytest.raises(FactorizationError, match="AᵀD − CᵀB ≠ I"):
        factor_sp4(np.diag([2.0, 1, 1, 1]))


def test_round_trip_random_products():
    rng = np.random.default_rng(1)
    for _ in range(50):
        A, _ = random_elementary_product(rng)
        res = factor_sp4(A)
        assert res.residual <= 1e-9 and res.count <= 16
        assert res.stage2_deviation <= 1e-9
        for f in res.factors:
            assert np.allclose(np.array(f.params), np.array(f.params).T)
            assert is_symplectic(f.to_numpy().tolist(), 1e-12)


def test_complex_input():
    rng = np.random.default_rng(2)
    fs = [ElemFactor(Parity.LOWER if k % 2 == 0 else Parity.UPPER,
                     (lambda x: [[x[0], x[1]], [x[1], x[2]]])(rng.normal(size=3) + 1j * rng.normal(size=3)))
          for k in range(6)]
    A = product_of(fs)
    res = factor_sp4(A)
    assert res.residual <= 1e-9


def test_merge_factors():
    L = lambda u: ElemFactor(Parity.LOWER, u)
    U = lambda u: ElemFactor(Parity.UPPER, u)
    merged = merge_factors([L([[1, 0], [0, 0]]), L([[-1, 0], [0, 0]]), U([[0, 0], [0, 0]]), U([[1, 1], [1, 1]])])
    assert [f.parity for f in merged] == [Parity.UPPER]
    assert merge_factors([L([[1, 2], [2, 1]]), L([[1, 0], [0, 1]])])[0].params == ((2, 2), (2, 2))


def test_exp_zero_and_lower_block():
    g0 = exp_factorization([ElemFactor(Parity.LOWER, [[0, 0], [0, 0]])]).logs[0]
    assert all(x == 0 for r in g0 for x in r)
    g = exp_factorization([ElemFactor(Parity.LOWER, [[1, 2], [2, 3]])]).logs[0]
    assert g == [[0, 0, 0, 0], [0, 0, 0, 0], [1, 2, 0, 0], [2, 3, 0, 0]]
    gm = np.array(g, dtype=float)
    assert not (gm @ gm).any()


def test_exp_pipeline_reconstructs():
    rng = np.random.default_rng(3)
    A, _ = random_elementary_product(rng)
    ex = exp_factorization(factor_sp4(A).factors)
    assert ex.max_square_norm() <= 1e-14
    assert np.linalg.norm(ex.reconstruct() - A) <= 1e-9 * np.linalg.norm(A)
    for g in ex.logs:
        assert np.array_equal(exp_nilpotent(g), np.eye(4) + g)
