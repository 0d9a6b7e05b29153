"""Pointwise factorization of Sp4(C) matrices into elementary factors.

Pipeline for ``A``: match the last row with three factors ``E``, reduce
``C = E A^-1`` to an SL2 block on rows/columns {1, 3}, factor that block
into transvections, and split the remainder into one Whitehead block and
one upper factor.  Every result is checked by re-multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .strata import preimage_last_row
from .symgroup import (
    ElemFactor,
    Parity,
    symplectic_violations,
    transvection_factor,
    whitehead_factors,
)

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
MAX_FACTORS = 16


class FactorizationError(ValueError):
    """Raised with the name of the failing stage."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage


@dataclass
class FactorizationResult:
    factors: list[ElemFactor]
    residual: float
    stage2_deviation: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.factors)

    def product(self) -> np.ndarray:
        return product_of(self.factors)


@dataclass
class ExpFactorization:
    logs: list

    def reconstruct(self) -> np.ndarray:
        out = np.eye(4, dtype=complex)
        for g in self.logs:
            out = out @ (np.eye(4) + np.asarray(g, dtype=complex))
        return out

    def max_square_norm(self) -> float:
        return max((float(np.abs(np.asarray(g, dtype=complex) @ np.asarray(g, dtype=complex)).max())
                    for g in self.logs), default=0.0)


def product_of(factors: Sequence[ElemFactor], size: int = 4) -> np.ndarray:
    out = np.eye(size, dtype=complex)
    for f in factors:
        out = out @ f.to_numpy()
    return out


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(b), 1.0)
    return float(np.linalg.norm(a - b) / scale)


# -- SL2 ---------------------------------------------------------------------


def factor_sl2(m, tol: float = 1e-9) -> list[tuple[bool, complex]]:
    """Transvections ``(lower, u)`` whose product in order is ``m``.

    ``lower`` means ``[[1,0],[u,1]]``, otherwise ``[[1,u],[0,1]]``.
    """
    (a, b), (c, d) = np.asarray(m, dtype=complex)
    if abs(a * d - b * c - 1) > tol:
        raise FactorizationError("sl2", f"not unimodular: det = {a * d - b * c}")
    scale = max(abs(a), abs(b), abs(c), abs(d))
    pre = []
    if max(abs(b), abs(c)) < 1e-3 * scale:
        # near-diagonal: a lower pre-transvection makes c usable
        s = 1.0 if abs(c - a) >= abs(c + a) else -1.0
        pre = [(True, s)]
        c, d = c - s * a, d - s * b
    if abs(c) >= abs(b):
        out = [(False, (a - 1) / c), (True, c), (False, (d - 1) / c)]
    else:
        out = [(True, (d - 1) / b), (False, b), (True, (a - 1) / b)]
    return _merge_transvections(pre + out)


def _merge_transvections(ts):
    out: list[tuple[bool, complex]] = []
    for lower, u in ts:
        if u == 0:
            continue
        if out and out[-1][0] == lower:
            u = out.pop()[1] + u
            if u == 0:
                continue
        out.append((lower, u))
    return out


def sl2_product(ts) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    for lower, u in ts:
        out = out @ (np.array([[1, 0], [u, 1]]) if lower else np.array([[1, u], [0, 1]]))
    return out


# -- Sp4 ---------------------------------------------------------------------


def merge_factors(factors: Sequence[ElemFactor]) -> list[ElemFactor]:
    """Drop zero factors and add adjacent factors of equal parity."""
    out: list[ElemFactor] = []
    for f in factors:
        if f.is_trivial():
            continue
        if out and out[-1].parity is f.parity:
            prev = out.pop()
            f = ElemFactor(f.parity, [[x + y for x, y in zip(r, s)] for r, s in zip(prev.params, f.params)])
            if f.is_trivial():
                continue
        out.append(f)
    return out


def _as_matrix(A) -> np.ndarray:
    m = np.array([[complex(x) for x in row] for row in A], dtype=complex)
    if m.shape != (4, 4):
        raise FactorizationError("input", f"expected a 4x4 matrix, got shape {m.shape}")
    return m


def _numeric(f: ElemFactor) -> ElemFactor:
    return ElemFactor(f.parity, [[complex(x) for x in r] for r in f.params])


def _stage2_deviation(C: np.ndarray) -> float:
    forced = [(C[3, 0], 0), (C[3, 1], 0), (C[3, 2], 0), (C[3, 3], 1),
              (C[0, 1], 0), (C[2, 1], 0), (C[1, 1], 1)]
    return max(abs(x - y) for x, y in forced)


# retry candidates for the last block of the last-row preimage
Z2_CANDIDATES = [[[s, 0], [0, 0]] for s in (1, -1)] + [[[0, s], [s, 0]] for s in (1, -1)] + \
    [[[0, 0], [0, s]] for s in (1, -1)]


def factor_sp4(A, tol: float = 1e-9) -> FactorizationResult:
    """Factor ``A``; the default preimage is tried first, the unit choices of
    its last block only when the residual leaves less than 100x headroom."""
    m = _as_matrix(A)
    norm = max(np.linalg.norm(m), 1.0)
    bad = symplectic_violations(m.tolist(), tol * norm * norm)
    if bad:
        raise FactorizationError("input", "not symplectic: " + ", ".join(bad))
    best, error = None, None
    for attempt, z2 in enumerate([None] + Z2_CANDIDATES):
        try:
            res = _factor_with(m, norm, tol, z2)
        except (FactorizationError, ValueError, np.linalg.LinAlgError) as exc:
            error = exc
            continue
        res.diagnostics["attempt"] = attempt
        if best is None or res.residual < best.residual:
            best = res
        if best.residual <= tol * 1e-2:
            break
    if best is None:
        raise error if isinstance(error, FactorizationError) else FactorizationError("stage 1", str(error))
    if best.residual > tol:
        raise FactorizationError("reassembly", f"relative residual {best.residual:.3e} exceeds {tol:.1e}")
    if best.count > MAX_FACTORS:
        raise FactorizationError("reassembly", f"{best.count} factors exceed the bound {MAX_FACTORS}")
    return best


def _factor_with(m: np.ndarray, norm: float, tol: float, z2) -> FactorizationResult:
    # (1) three factors with the same last row
    E_factors = [_numeric(f) for f in preimage_last_row(list(m[3]), z2=z2)]
    E = product_of(E_factors)
    # (2) C = E A^-1 with A^-1 = -J A^T J
    C = E @ (-J4 @ m.T @ J4)
    dev = _stage2_deviation(C)
    if dev > tol * max(1.0, np.linalg.norm(E) * norm):
        raise FactorizationError("stage 2", f"forced entries of E A^-1 off by {dev:.3e}")
    # (3, 4) the SL2 block on rows/columns {1, 3}, inverted and factored
    f_inv = np.linalg.inv(np.array([[C[0, 0], C[0, 2]], [C[2, 0], C[2, 2]]]))
    ts = factor_sl2(f_inv, tol=max(tol, 1e-9) * max(1.0, np.linalg.norm(f_inv)) ** 2)
    psi_factors = [transvection_factor(lower, u) for lower, u in ts]
    # (5) R = C psi(f^-1) = LHS(a) . Upper(U)
    R = C @ product_of(psi_factors)
    a = R[1, 0]
    Y = np.linalg.solve(product_of(whitehead_factors(a)), R)
    U = Y[:2, 2:]
    U = (U + U.T) / 2
    # (6) A = psi(f^-1) . Upper(-U) . whitehead(-a) . E
    assembled = psi_factors + [ElemFactor(Parity.UPPER, (-U).tolist())] + whitehead_factors(-a) + E_factors
    factors = merge_factors([_numeric(f) for f in assembled])
    residual = _rel(product_of(factors), m)
    return FactorizationResult(factors, residual, dev, {"sl2_transvections": len(ts), "whitehead_a": complex(a)})


# -- exponentials -------------------------------------------------------------


def exp_factorization(factors: Sequence[ElemFactor]) -> ExpFactorization:
    """``G_i = M_i - I``; ``G_i^2 = 0`` so ``exp(G_i) = I + G_i`` exactly."""
    logs = []
    for f in factors:
        exact = all(isinstance(x, (int, Fraction)) for r in f.params for x in r)
        if exact:
            g = [[Fraction(0)] * 4 for _ in range(4)]
            for i in range(2):
                for j in range(2):
                    if f.is_lower:
                        g[2 + i][j] = Fraction(f.params[i][j])
                    else:
                        g[i][2 + j] = Fraction(f.params[i][j])
            logs.append(g)
        else:
            logs.append(f.to_numpy() - np.eye(4))
    return ExpFactorization(logs)


def exp_nilpotent(G) -> np.ndarray:
    """Truncated exponential ``I + G + G^2/2``; equals ``I + G`` when ``G^2 = 0``."""
    g = np.asarray(G, dtype=complex)
    return np.eye(len(g)) + g + g @ g / 2


def random_elementary_product(rng: np.random.Generator, count: int = 8) -> tuple[np.ndarray, list[ElemFactor]]:
    """Alternating product of ``count`` factors with entries uniform in [-1, 1]."""
    factors = []
    for k in range(count):
        x = rng.uniform(-1, 1, 3)
        u = [[x[0], x[1]], [x[1], x[2]]]
        factors.append(ElemFactor(Parity.LOWER if k % 2 == 0 else Parity.UPPER, u))
    return product_of(factors), factors
