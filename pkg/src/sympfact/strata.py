"""Jacobians of the last-row map, the singular set, and fiber sampling.

Points are dictionaries ``VarId -> value`` with exact ``Fraction`` values
(or complex numbers for numeric work).
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .polycore import MPoly, VarId, exact_rank
from .report import Report, rand_nonzero_rat, rand_rat
from .symgroup import ElemFactor, Parity, last_row_of, symbolic_factors

__all__ = [
    "all_vars",
    "jacobian_vars",
    "jacobian",
    "jacobian_at",
    "factors_from_point",
    "point_from_factors",
    "evaluate_last_row",
    "in_singular_set",
    "in_singular_set_alt",
    "singular_point",
    "random_point",
    "verify_submersivity",
    "solve_symmetric",
    "preimage_last_row",
    "complete_three",
    "StratumLabel",
    "Stratum",
    "classify_fiber",
    "FiberPoint",
    "OnStratum",
    "OnComponent",
    "sample_fiber_point",
]


def _sym_positions(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]


def all_vars(K: int, n: int) -> list[VarId]:
    return [VarId(k, i, j) for k in range(1, K + 1) for i, j in _sym_positions(n)]


def _used(v: VarId, n: int) -> bool:
    # only the last row of the first factor reaches the last row of the product
    return v.factor != 1 or v.j == n


def jacobian_vars(K: int, n: int) -> list[VarId]:
    """Column variables of the Jacobian (structurally zero columns removed)."""
    return [v for v in all_vars(K, n) if _used(v, n)]


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, MPoly))


def _jacobian_recursion(factors: Sequence[ElemFactor], n: int):
    """Last row and Jacobian columns, built one factor at a time."""
    top = [0] * n
    bot = [0] * (n - 1) + [1]
    cols: list[list] = []
    for k, f in enumerate(factors, start=1):
        u = f.params
        if f.is_lower:
            for c in cols:
                ct, cb = c[:n], c[n:]
                c[:n] = [ct[r] + _dot(u[r], cb) for r in range(n)]
            src = bot
        else:
            for c in cols:
                ct, cb = c[:n], c[n:]
                c[n:] = [cb[r] + _dot(u[r], ct) for r in range(n)]
            src = top
        new = []
        for i, j in _sym_positions(n):
            if k == 1 and not _used(VarId(1, i, j), n):
                continue
            half = [0] * n
            half[j - 1] = src[i - 1]
            if i != j:
                half[i - 1] = src[j - 1]
            new.append(half + [0] * n if f.is_lower else [0] * n + half)
        if f.is_lower:
            top = [top[r] + _dot(u[r], bot) for r in range(n)]
        else:
            bot = [bot[r] + _dot(u[r], top) for r in range(n)]
        cols.extend(new)
    return top + bot, cols


def _dot(row, vec):
    acc = 0
    for x, y in zip(row, vec):
        if not (type(y) is int and y == 0) and not (type(x) is int and x == 0):
            acc = acc + x * y
    return acc


def _as_poly(x) -> MPoly:
    return x if isinstance(x, MPoly) else MPoly.const(x)


def jacobian(K: int, n: int) -> list[list[MPoly]]:
    """Symbolic ``2n x m`` Jacobian, columns in :func:`jacobian_vars` order."""
    if K < 1:
        raise ValueError("K must be at least 1")
    _, cols = _jacobian_recursion(symbolic_factors(K, n), n)
    return [[_as_poly(c[r]) for c in cols] for r in range(2 * n)]


def factors_from_point(point: Mapping[VarId, object], K: int, n: int,
                       upper_first: bool = False) -> list[ElemFactor]:
    out = []
    for k in range(1, K + 1):
        lower = (k % 2 == 1) != upper_first
        u = [[point.get(VarId.make(k, i + 1, j + 1), 0) for j in range(n)] for i in range(n)]
        out.append(ElemFactor(Parity.LOWER if lower else Parity.UPPER, u))
    return out


def point_from_factors(factors: Sequence[ElemFactor]) -> dict[VarId, object]:
    pt = {}
    for k, f in enumerate(factors, start=1):
        for i, j in _sym_positions(f.n):
            pt[VarId(k, i, j)] = f.params[i - 1][j - 1]
    return pt


def jacobian_at(point: Mapping[VarId, object], K: int, n: int) -> list[list]:
    """Jacobian evaluated at a point by running the recursion on numbers."""
    _, cols = _jacobian_recursion(factors_from_point(point, K, n), n)
    return [[c[r] for c in cols] for r in range(2 * n)]


def evaluate_last_row(point: Mapping[VarId, object], K: int, n: int) -> list:
    vals = last_row_of(factors_from_point(point, K, n), n)
    vals = [v.constant_term() if isinstance(v, MPoly) else v for v in vals]
    return [Fraction(v) if isinstance(v, int) else v for v in vals]


# -- singular set -------------------------------------------------------


def _rank(m) -> int:
    if all(_is_exact(x) for row in m for x in row):
        return exact_rank(m)
    return int(np.linalg.matrix_rank(np.array(m, dtype=complex), tol=1e-9))


def _singular(point, K: int, n: int, w_upto: int) -> bool:
    if K < 2:
        raise ValueError("the singular set is defined for K >= 2")
    for k in range(1, K):
        if k % 2 == 1:
            if any(point.get(VarId.make(k, n, j), 0) != 0 for j in range(1, n + 1)):
                return False
    w_cols = []
    for k in range(2, w_upto + 1, 2):
        u = [[point.get(VarId.make(k, i, j), 0) for j in range(1, n + 1)] for i in range(1, n + 1)]
        w_cols.extend(zip(*u))
    if not w_cols:
        return True
    return _rank([list(r) for r in zip(*w_cols)]) < n


def in_singular_set(point: Mapping[VarId, object], K: int, n: int) -> bool:
    """Literal reading: last-row z's of lower factors among the first K-1
    vanish and the W blocks among the first K-1 factors have rank < n."""
    return _singular(point, K, n, K - 1)


def in_singular_set_alt(point: Mapping[VarId, object], K: int, n: int) -> bool:
    """Alternative reading that also counts the K-th factor's W block."""
    return _singular(point, K, n, K)


def random_point(K: int, n: int, rng: random.Random) -> dict[VarId, Fraction]:
    return {v: rand_rat(rng) for v in all_vars(K, n)}


def _rand_sym(n: int, rng: random.Random) -> list[list[Fraction]]:
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = rand_rat(rng)
    return m


def singular_point(K: int, n: int, rng: random.Random) -> dict[VarId, Fraction]:
    """A point of S_K: mandated z's zero, every W block of the form V C Vᵀ
    with a common ``n x (n-1)`` matrix V, so the stacked columns lie in
    the column space of V."""
    pt = random_point(K, n, rng)
    for k in range(1, K, 2):
        for j in range(1, n + 1):
            pt[VarId.make(k, n, j)] = Fraction(0)
    v = [[rand_rat(rng) for _ in range(n - 1)] for _ in range(n)]
    for k in range(2, K, 2):
        c = _rand_sym(n - 1, rng)
        for i in range(n):
            for j in range(i, n):
                pt[VarId(k, i + 1, j + 1)] = sum(
                    (v[i][a] * c[a][b] * v[j][b] for a in range(n - 1) for b in range(n - 1)),
                    Fraction(0),
                )
    return pt


def verify_submersivity(K: int, n: int, samples: int, seed: int) -> Report:
    """Exact rank dichotomy on random points and on constructed S_K points.

    Three families per sample: a random point, a point with all mandated
    z's zero but random W's, and a constructed point of S_K.
    """
    if K < 3:
        raise ValueError("K must be at least 3")
    rng = random.Random(seed)
    rep = Report(f"submersivity K={K} n={n}")
    disagreements = literal_right = 0
    for s in range(samples):
        for kind in ("random", "zrows", "singular"):
            if kind == "singular":
                pt = singular_point(K, n, rng)
            else:
                pt = random_point(K, n, rng)
                if kind == "zrows":
                    for k in range(1, K, 2):
                        for j in range(1, n + 1):
                            pt[VarId.make(k, n, j)] = Fraction(0)
            sing = in_singular_set(pt, K, n)
            if kind == "singular" and not sing:
                rep.check(False, f"sample {s} constructed point outside S_K", "in S_K", "outside")
                continue
            r = exact_rank(jacobian_at(pt, K, n))
            if sing != in_singular_set_alt(pt, K, n):
                disagreements += 1
                if (r < 2 * n) == sing:
                    literal_right += 1
            if sing:
                rep.check(r < 2 * n, f"sample {s} {kind} in S_K", f"rank < {2 * n}", r)
            else:
                rep.check(r == 2 * n, f"sample {s} {kind} off S_K", 2 * n, r)
    rep.notes["reading_disagreements"] = disagreements
    rep.notes["disagreements_where_rank_matches_literal"] = literal_right
    return rep


# -- surjectivity constructor --------------------------------------------


def _exact_vec(v) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in v)


def _zero(x) -> bool:
    return x == 0


def solve_symmetric(c: Sequence, d: Sequence, rng: random.Random | None = None) -> list[list]:
    """Symmetric ``M`` with ``M c = d`` by the pivot recipe.

    Pivot ``i`` maximises ``|c_i|``; row/column ``i`` carry ``d_j / c_i`` and
    the remaining entries are zero.  With ``rng`` a random element of the
    solution space's kernel directions ``u uᵀ``-type terms is added.
    """
    n = len(c)
    if all(_zero(x) for x in c):
        raise ValueError("c must be nonzero")
    exact = _exact_vec(c) and _exact_vec(d)
    i = max(range(n), key=lambda k: abs(c[k]))
    ci = c[i]
    inv = (Fraction(1) / ci) if exact else 1 / ci
    m = [[Fraction(0) if exact else 0j for _ in range(n)] for _ in range(n)]
    acc = d[i]
    for j in range(n):
        if j != i:
            m[i][j] = m[j][i] = d[j] * inv
            acc = acc - m[i][j] * c[j]
    m[i][i] = acc * inv
    if rng is not None:
        others = [j for j in range(n) if j != i]
        basis = []
        for j in others:
            u = [0] * n
            u[j] = ci
            u[i] = -c[j]
            basis.append(u)
        for a in range(len(basis)):
            for b in range(a, len(basis)):
                lam = rand_rat(rng) if exact else complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                ua, ub = basis[a], basis[b]
                for p in range(n):
                    for q in range(n):
                        m[p][q] += lam * (ua[p] * ub[q] + ub[p] * ua[q]) / (2 if a == b else 1)
    return m


def _sym_units(n: int) -> list[list[list[int]]]:
    out = []
    for i in range(n):
        for j in range(i, n):
            e = [[0] * n for _ in range(n)]
            e[i][j] = e[j][i] = 1
            out.append(e)
    return out


def _matvec(m, v):
    return [_dot(row, v) for row in m]


def _norm(v) -> float:
    return float(np.linalg.norm(np.array(v, dtype=complex)))


def preimage_last_row(a: Sequence, n: int | None = None, z2: Sequence | None = None) -> list[ElemFactor]:
    """Factors ``(Z1, W1, Z2)`` outside S_3 whose last row is ``a``.

    ``z2`` overrides the automatic choice of the last block.
    """
    if n is None:
        n = len(a) // 2
    if len(a) != 2 * n:
        raise ValueError(f"expected a vector of length {2 * n}")
    if all(_zero(x) for x in a):
        raise ValueError("a = 0 is not in the image")
    exact = _exact_vec(a)
    a = [Fraction(x) for x in a] if exact else [complex(x) for x in a]
    at, ab = a[:n], a[n:]
    zero = Fraction(0) if exact else 0j
    if z2 is not None:
        z2 = [[Fraction(x) if exact else complex(x) for x in r] for r in z2]
    elif exact:
        z2 = [[zero] * n for _ in range(n)]
        if all(_zero(x) for x in at):
            i = next(k for k in range(n) if ab[k] != 0)
            z2[i][i] = Fraction(1)
    elif _norm(at) >= 1e-6 * _norm(a):
        z2 = [[zero] * n for _ in range(n)]
    else:
        z2 = max(_sym_units(n), key=lambda e: _norm([x - y for x, y in zip(at, _matvec(e, ab))]))
        z2 = [[complex(x) for x in r] for r in z2]
    zhat = [x - y for x, y in zip(at, _matvec(z2, ab))]
    z1 = [[zero] * n for _ in range(n)]
    for j in range(n):
        z1[n - 1][j] = z1[j][n - 1] = zhat[j]
    rhs = list(ab)
    rhs[n - 1] = rhs[n - 1] - 1
    w1 = solve_symmetric(zhat, rhs)
    return [ElemFactor(Parity.LOWER, z1), ElemFactor(Parity.UPPER, w1), ElemFactor(Parity.LOWER, z2)]


def complete_three(b: Sequence, a: Sequence, lower_first: bool,
                   rng: random.Random, max_tries: int = 50) -> list[ElemFactor] | None:
    """Three alternating factors taking the prefix value ``b`` to ``a``.

    ``b`` is the transposed last row of the prefix product.  Returns None
    when the needed half of ``b`` vanishes.
    """
    n = len(a) // 2
    exact = _exact_vec(a) and _exact_vec(b)
    if lower_first:
        p_top, p_bot, t_top, t_bot = b[:n], b[n:], a[:n], a[n:]
    else:
        p_top, p_bot, t_top, t_bot = b[n:], b[:n], a[n:], a[:n]
    # roles swap for the Upper-first pattern: "top" is the half the first factor changes
    if all(_zero(x) for x in p_bot):
        return None
    for _ in range(max_tries):
        last = _rand_sym(n, rng) if exact else _rand_sym_c(n, rng)
        hat = [x - y for x, y in zip(t_top, _matvec(last, t_bot))]
        if all(_zero(x) for x in hat):
            continue
        first = solve_symmetric(p_bot, [x - y for x, y in zip(hat, p_top)], rng)
        mid = solve_symmetric(hat, [x - y for x, y in zip(t_bot, p_bot)], rng)
        pa, pb = (Parity.LOWER, Parity.UPPER) if lower_first else (Parity.UPPER, Parity.LOWER)
        return [ElemFactor(pa, first), ElemFactor(pb, mid), ElemFactor(pa, last)]
    return None


def _rand_sym_c(n: int, rng: random.Random):
    m = [[0j] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return m


# -- fiber strata ---------------------------------------------------------


class StratumLabel(enum.Enum):
    GENERIC_SMOOTH = "GenericSmooth"
    GENERIC_SINGULAR = "GenericSingular"
    NONGENERIC_SMOOTH = "NonGenericSmooth"
    NONGENERIC_SINGULAR = "NonGenericSingular"


@dataclass(frozen=True)
class Stratum:
    label: StratumLabel
    parity: str  # "odd" | "even"


def classify_fiber(K: int, a: Sequence) -> Stratum:
    if K < 3:
        raise ValueError("K must be at least 3")
    if len(a) != 4:
        raise ValueError("classification is for n = 2 (4-vectors)")
    if all(_zero(x) for x in a):
        raise ValueError("a = 0 is not in the image")
    a1, a2, a3, a4 = a
    L = StratumLabel
    if K % 2 == 1:
        if (a3, a4) == (0, 0):
            return Stratum(L.NONGENERIC_SMOOTH, "odd")
        return Stratum(L.GENERIC_SINGULAR if (a3, a4) == (0, 1) else L.GENERIC_SMOOTH, "odd")
    if (a1, a2) != (0, 0):
        return Stratum(L.GENERIC_SMOOTH, "even")
    return Stratum(L.NONGENERIC_SINGULAR if (a3, a4) == (0, 1) else L.NONGENERIC_SMOOTH, "even")


@dataclass
class FiberPoint:
    point: dict[VarId, object]
    K: int
    n: int
    target: list = field(default_factory=list)

    def recompute(self) -> list:
        return evaluate_last_row(self.point, self.K, self.n)

    def is_consistent(self, tol: float = 1e-12) -> bool:
        got = self.recompute()
        if _exact_vec(got) and _exact_vec(self.target):
            return list(got) == list(self.target)
        return max(abs(complex(x) - complex(y)) for x, y in zip(got, self.target)) <= tol

    def value(self, v: VarId):
        return self.point.get(v, 0)


@dataclass(frozen=True)
class OnStratum:
    label: StratumLabel


@dataclass(frozen=True)
class OnComponent:
    name: str  # "A1" | "A2"


def _random_target(K: int, label: StratumLabel, rng: random.Random) -> list[Fraction]:
    L = StratumLabel
    odd = K % 2 == 1

    def pair_nonzero():
        while True:
            p = [rand_rat(rng), rand_rat(rng)]
            if any(p):
                return p

    def pair_generic():
        # (x, y) not in {(0, 0), (0, 1)}
        while True:
            p = [rand_rat(rng), rand_rat(rng)]
            if p not in ([0, 0], [0, 1]):
                return p

    if odd:
        if label is L.GENERIC_SMOOTH:
            return [rand_rat(rng), rand_rat(rng)] + pair_generic()
        if label is L.GENERIC_SINGULAR:
            return [rand_rat(rng), rand_rat(rng), Fraction(0), Fraction(1)]
        if label is L.NONGENERIC_SMOOTH:
            return pair_nonzero() + [Fraction(0), Fraction(0)]
    else:
        if label is L.GENERIC_SMOOTH:
            return pair_nonzero() + [rand_rat(rng), rand_rat(rng)]
        if label is L.NONGENERIC_SMOOTH:
            return [Fraction(0), Fraction(0)] + pair_generic()
        if label is L.NONGENERIC_SINGULAR:
            return [Fraction(0), Fraction(0), Fraction(0), Fraction(1)]
    raise ValueError(f"stratum {label.value} does not occur for {'odd' if odd else 'even'} K")


def fiber_point_for(K: int, a: Sequence, rng: random.Random, max_tries: int = 100) -> FiberPoint:
    """A random point on the fiber over ``a``: random prefix plus completion."""
    n = len(a) // 2
    if K < 3:
        raise ValueError("K must be at least 3")
    for _ in range(max_tries):
        prefix = factors_from_point(random_point(K - 3, n, rng), K - 3, n)
        b = last_row_of(prefix, n) if prefix else [0] * (2 * n - 1) + [1]
        b = [x.constant_term() if isinstance(x, MPoly) else x for x in b]
        tail = complete_three(b, a, lower_first=(K % 2 == 1), rng=rng)
        if tail is None:
            continue
        fp = FiberPoint(point_from_factors(prefix + tail), K, n, list(a))
        if fp.is_consistent():
            return fp
    raise RuntimeError("could not complete a fiber point")


def sample_fiber_point(K: int, n: int, mode=None, seed: int = 0) -> FiberPoint:
    """Draw a fiber point.  ``mode`` is None (random), OnStratum or OnComponent."""
    rng = random.Random(seed)
    if mode is None:
        pt = random_point(K, n, rng)
        return FiberPoint(pt, K, n, evaluate_last_row(pt, K, n))
    if n != 2:
        raise ValueError("targeted sampling is implemented for n = 2")
    if isinstance(mode, OnStratum):
        a = _random_target(K, mode.label, rng)
        return fiber_point_for(K, a, rng)
    if isinstance(mode, OnComponent):
        if K != 3:
            raise ValueError("components A1/A2 are defined for K = 3")
        pt = random_point(3, 2, rng)
        if mode.name == "A1":
            pt[VarId(1, 1, 2)] = pt[VarId(1, 2, 2)] = Fraction(0)
        elif mode.name == "A2":
            z2, z3 = rand_nonzero_rat(rng), rand_nonzero_rat(rng)
            pt[VarId(1, 1, 2)], pt[VarId(1, 2, 2)] = z2, z3
            lam = rand_nonzero_rat(rng)
            u = (-z3, z2)
            pt[VarId(2, 1, 1)] = lam * u[0] * u[0]
            pt[VarId(2, 1, 2)] = lam * u[0] * u[1]
            pt[VarId(2, 2, 2)] = lam * u[1] * u[1]
        else:
            raise ValueError(f"unknown component {mode.name!r}")
        return FiberPoint(pt, 3, 2, evaluate_last_row(pt, 3, 2))
    raise ValueError(f"unknown sampling mode {mode!r}")
