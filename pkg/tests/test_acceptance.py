"""Acceptance criteria 1-12, one test each; every test prints one PASS/FAIL line."""
import time

import numpy as np
import pytest

from sympfact import fields, suites
from sympfact.factor import exp_factorization, factor_sp4, random_elementary_product
from sympfact.report import derived_seed

SEED = 0


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'} {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail
    return emit


def _failures(rep) -> str:
    return "; ".join(f"{f['case']}: expected {f['expected']}, got {f['got']}" for f in rep.failures[:3])


def test_01_whitehead_identity(verdict):
    t0 = time.perf_counter()
    rep = suites.whitehead_suite()
    dt = time.perf_counter() - t0
    verdict(1, "Whitehead identity is exact", rep.ok and dt < 1, f"{dt:.2f}s {_failures(rep)}")


def test_02_last_row_recursion(verdict):
    rep = suites.last_row_suite()
    verdict(2, "last-row recursion equals full product", rep.ok and rep.checked == 14, _failures(rep))


def test_03_submersivity_dichotomy(verdict):
    t0 = time.perf_counter()
    rep = suites.submersivity_suite(200, derived_seed(SEED, "submersivity"))
    dt = time.perf_counter() - t0
    verdict(3, "Jacobian rank dichotomy on and off the singular set", rep.ok and dt < 300,
            f"{rep.checked} checks, {dt:.1f}s {_failures(rep)}")


def test_04_surjectivity_constructor(verdict):
    rep = suites.surjectivity_suite(200, derived_seed(SEED, "surjectivity"))
    verdict(4, "last-row preimages reproduce their targets", rep.ok and rep.checked == 200, _failures(rep))


def test_05_complete_triples(verdict):
    rep = suites.triples_suite(6)
    disc = rep.notes["pattern_discrepancies"]
    ok = rep.ok and fields.classify_triples(2) == fields.T2_LISTED and not disc
    verdict(5, "base triples, inclusion chain and union patterns", ok,
            f"sizes {rep.notes['sizes']} discrepancies {disc} {_failures(rep)}")


def test_06_tables_byte_identical(verdict):
    tables = fields.regen_tables()
    differing = [name for name, cells in tables.items()
                 if fields.render_table(cells, "computed") != fields.render_table(cells, "printed")]
    diff = fields.table_diff(tables)
    verdict(6, "tables regenerate byte-identically", not differing,
            "; ".join(f"{d['table']} {d['cell']}: printed {d['printed']}, computed {d['computed']} [{d['status']}]"
                      for d in diff))


def test_07_r_minor_identities_and_recursions(verdict):
    rep = suites.r_minor_suite(6)
    verdict(7, "R-minor identities and recursions to level 6", rep.ok, f"{rep.checked} checks {_failures(rep)}")


def test_08_tangency(verdict):
    rep = fields.tangency_suite(6)
    conf = rep.notes["sign_conformance"]
    verdict(8, "theta/phi/gamma annihilate every P_i^L up to level 6", rep.ok and "odd_printed" in conf,
            f"{rep.checked} checks, sign conformance {conf} {_failures(rep)}")


def test_09_spanning(verdict):
    rep = fields.spanning_suite((4, 5, 6), 100, derived_seed(SEED, "spanning"))
    verdict(9, "new directions are spanned on generic fibers", rep.ok and rep.checked == 300,
            f"{rep.checked} points {_failures(rep)}")


def test_10_rank_stability(verdict):
    rep = fields.rank_stability_suite(100, derived_seed(SEED, "rank_stability"))
    verdict(10, "stacked R-matrix rank is level independent", rep.ok and rep.checked == 100,
            f"base ranks {rep.notes['base_rank_histogram']} {_failures(rep)}")


@pytest.fixture(scope="module")
def round_trips():
    rng = np.random.default_rng(derived_seed(SEED, "factor") % 2**32)
    t0 = time.perf_counter()
    out = []
    for _ in range(100):
        A, _ = random_elementary_product(rng, 8)
        out.append((A, factor_sp4(A)))
    return out, time.perf_counter() - t0


def test_11_factorization_round_trip(verdict, round_trips):
    results, dt = round_trips
    worst = max(r.residual for _, r in results)
    count = max(r.count for _, r in results)
    dev = max(r.stage2_deviation for _, r in results)
    ok = len(results) == 100 and worst <= 1e-9 and count <= 16 and dev <= 1e-9 and dt < 10
    verdict(11, "factorization round trip", ok,
            f"max residual {worst:.2e}, max count {count}, stage-2 deviation {dev:.2e}, {dt:.2f}s")


def test_12_exponential_factorization(verdict, round_trips):
    results, _ = round_trips
    sq, err = 0.0, 0.0
    for A, res in results:
        ex = exp_factorization(res.factors)
        sq = max(sq, ex.max_square_norm())
        err = max(err, float(np.linalg.norm(ex.reconstruct() - A) / np.linalg.norm(A)))
    verdict(12, "nilpotent logarithms reconstruct the input", sq <= 1e-14 and err <= 1e-9,
            f"max |G^2| {sq:.1e}, max error {err:.2e}")
