"""Verification campaigns run by ``verify`` and by the acceptance tests."""
from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from . import fields
from .factor import FactorizationError, exp_factorization, factor_sp4, random_elementary_product
from .polycore import MPoly, VarId
from .report import Report, derived_seed, rand_nonzero_rat, rand_rat
from .strata import preimage_last_row, random_point, verify_submersivity
from .symgroup import (
    is_symplectic,
    last_row,
    last_row_of,
    mat_sub,
    is_zero_matrix,
    printed_whitehead_factors,
    psi_product,
    symbolic_factors,
    whitehead_factors,
    whitehead_lhs,
)


def timed(fn: Callable[[], Report]) -> Report:
    t0 = time.perf_counter()
    rep = fn()
    rep.wall_time = time.perf_counter() - t0
    return rep


def whitehead_suite() -> Report:
    rep = Report("whitehead")
    a = MPoly.var(VarId(1, 1, 1))  # stands in for the free parameter a
    diff = mat_sub(psi_product(whitehead_factors(a)), whitehead_lhs(a))
    rep.check(is_zero_matrix(diff), "product(whitehead(a)) - LHS(a)", "0",
              [[x.render() if isinstance(x, MPoly) else x for x in r] for r in diff])
    printed = is_zero_matrix(mat_sub(psi_product(printed_whitehead_factors(a)), whitehead_lhs(a)))
    rep.notes["printed_factors_match_lhs"] = printed
    return rep


def last_row_suite(cases=None) -> Report:
    rep = Report("last row")
    cases = cases or [(K, n) for n in (1, 2) for K in range(1, 6)] + [(K, 3) for K in range(1, 5)]
    for K, n in cases:
        direct = psi_product(symbolic_factors(K, n))[-1]
        rec = last_row(K, n)
        rep.check(all(x == y for x, y in zip(rec, direct)), f"K={K} n={n}")
    return rep


def submersivity_suite(samples: int, seed: int, ks=(3, 4, 5), ns=(1, 2, 3)) -> Report:
    rep = Report("submersivity")
    disagree = {}
    for K in ks:
        for n in ns:
            sub = verify_submersivity(K, n, samples, derived_seed(seed, f"subm:{K}:{n}"))
            rep.checked += sub.checked
            rep.failures.extend(sub.failures)
            disagree[f"K={K} n={n}"] = sub.notes.get("reading_disagreements", 0)
    rep.notes["reading_disagreements"] = disagree
    return rep


def surjectivity_suite(samples: int, seed: int) -> Report:
    rep = Report("surjectivity")
    rng = random.Random(seed)
    for s in range(samples):
        n = (1, 2, 3)[s % 3]
        if s % 2 == 0:
            a = [rand_rat(rng) for _ in range(2 * n)]
            if s % 10 == 0:
                a[:n] = [Fraction(0)] * n  # vanishing top half
            if not any(a):
                a[-1] = rand_nonzero_rat(rng)
            got = last_row_of(preimage_last_row(a))
            got = [x.constant_term() for x in got]
            rep.check(got == a, f"rational n={n} #{s}", [str(x) for x in a], [str(x) for x in got])
        else:
            a = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2 * n)]
            if s % 10 == 1:
                a[:n] = [0j] * n
            got = np.array([complex(x.constant_term() if isinstance(x, MPoly) else x)
                            for x in last_row_of(preimage_last_row(a))])
            err = float(np.linalg.norm(got - np.array(a)) / np.linalg.norm(a))
            rep.check(err <= 1e-12, f"complex n={n} #{s}", "<= 1e-12", err)
    return rep


def triples_suite(kmax: int) -> Report:
    return fields.triples_report(kmax)


def r_minor_suite(kmax: int) -> Report:
    rep = Report("R-minors")
    rep.merge(fields.verify_r_identities(kmax))
    rep.merge(fields.verify_r_recursions(kmax))
    return rep


def tables_suite(accept_errata: bool = False, tables=None) -> Report:
    """Byte-level comparison; ``accept_errata`` moves confirmed errata to notes."""
    rep = Report("tables")
    tables = tables or fields.regen_tables()
    errata = []
    for name, cells in tables.items():
        computed = fields.render_table(cells, "computed")
        printed = fields.render_table(cells, "printed")
        for cell in cells:
            if cell.matches:
                rep.check(True, "")
            elif accept_errata and cell.confirmed_erratum:
                rep.check(True, "")
                errata.append(f"{cell.table} {cell.row} {cell.col}")
            else:
                rep.check(False, f"{cell.table} {cell.row} {cell.col}", cell.printed.render(),
                          cell.computed.render() + (" (confirmed erratum)" if cell.confirmed_erratum else " (mismatch)"))
        rep.notes[f"{name}_byte_identical"] = computed == printed
    if errata:
        rep.notes["accepted_errata"] = errata
    return rep


def omega_suite(kmax: int, samples: int, seed: int) -> Report:
    rep = Report("omega rank")
    rng = random.Random(seed)
    hist = {}
    for K in range(3, kmax + 1):
        for s in range(samples):
            pt = random_point(K, 2, rng)
            if s % 4 == 3:
                pt = {v: (Fraction(0) if v.factor == K - 1 else x) for v, x in pt.items()}
            r = fields.omega_rank(K, pt)
            hist[f"K={K} rank={r}"] = hist.get(f"K={K} rank={r}", 0) + 1
            rep.check(r <= 2, f"K={K} #{s}", "<= 2", r)
    rep.notes["histogram"] = dict(sorted(hist.items()))
    return rep


def spanning_suite(kmax: int, samples: int, seed: int) -> Report:
    return fields.spanning_suite(range(4, kmax + 1), samples, seed)


def rank_stability_suite(kmax: int, samples: int, seed: int) -> Report:
    return fields.rank_stability_suite(samples, seed, kmax=kmax)


def factor_suite(samples: int, seed: int, tol: float = 1e-9) -> Report:
    """Round trip plus exponential reconstruction on random 8-factor products."""
    rep = Report("factorization")
    rng = np.random.default_rng(seed)
    counts, worst, dev, sq = [], 0.0, 0.0, 0.0
    for s in range(samples):
        A, _ = random_elementary_product(rng, 8)
        try:
            res = factor_sp4(A, tol)
        except FactorizationError as exc:
            rep.check(False, f"#{s}", "factorization", str(exc))
            continue
        counts.append(res.count)
        worst, dev = max(worst, res.residual), max(dev, res.stage2_deviation)
        rep.check(res.residual <= tol, f"#{s} residual", f"<= {tol}", res.residual)
        rep.check(res.count <= 16, f"#{s} count", "<= 16", res.count)
        rep.check(res.stage2_deviation <= 1e-9, f"#{s} stage 2", "<= 1e-9", res.stage2_deviation)
        rep.check(all(is_symplectic(f.matrix(), 1e-12) for f in res.factors), f"#{s} factors symplectic")
        ex = exp_factorization(res.factors)
        sq = max(sq, ex.max_square_norm())
        rep.check(ex.max_square_norm() <= 1e-14, f"#{s} G^2", "<= 1e-14", ex.max_square_norm())
        err = float(np.linalg.norm(ex.reconstruct() - A) / np.linalg.norm(A))
        rep.check(err <= 1e-9, f"#{s} exp reconstruction", "<= 1e-9", err)
    rep.notes["max_count"] = max(counts, default=0)
    rep.notes["max_residual"] = f"{worst:.3e}"
    rep.notes["max_stage2_deviation"] = f"{dev:.3e}"
    rep.notes["max_G_squared"] = f"{sq:.3e}"
    return rep


def verify_all(seed: int, kmax: int, samples: int, tol: float = 1e-9,
               inject_sign_flip: bool = False, accept_errata: bool = False,
               fields_only: bool = False) -> list[Report]:
    """All suites in the fixed order; deterministic given the arguments."""
    s = lambda name: derived_seed(seed, name)
    plan: list[tuple[str, Callable[[], Report]]] = []
    if not fields_only:
        plan += [
            ("whitehead", whitehead_suite),
            ("last_row", last_row_suite),
            ("submersivity", lambda: submersivity_suite(samples, s("submersivity"), ks=range(3, min(kmax, 5) + 1))),
            ("surjectivity", lambda: surjectivity_suite(samples, s("surjectivity"))),
        ]
    plan += [
        ("triples", lambda: triples_suite(kmax)),
        ("r_minors", lambda: r_minor_suite(kmax)),
        ("tangency", lambda: fields.tangency_suite(kmax, inject_sign_flip)),
        ("tables", lambda: tables_suite(accept_errata)),
        ("omega", lambda: omega_suite(kmax, samples, s("omega"))),
        ("rank_stability", lambda: rank_stability_suite(kmax, samples, s("rank_stability"))),
        ("spanning", lambda: spanning_suite(kmax, samples, s("spanning"))),
    ]
    if not fields_only:
        plan.append(("factor", lambda: factor_suite(samples, s("factor") % 2**32, tol)))
    return [timed(fn) for _, fn in plan]
