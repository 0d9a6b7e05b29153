"""Determinant vector fields on the n = 2 parameter space.

Covers the fields ``D_xyz(P, Q)``, the classification of complete triples,
the tangent fields theta/phi/gamma, the R-minors with their level
recursions, rank checks at points, and regeneration of the three
reference tables.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .polycore import MPoly, VarId, exact_rank, parse_poly, var_from_name, var_name
from .report import Report, rand_nonzero_rat
from .strata import (
    FiberPoint,
    StratumLabel,
    classify_fiber,
    evaluate_last_row,
    fiber_point_for,
    jacobian_at,
    jacobian_vars,
    random_point,
)
from .symgroup import last_row, psi_product, symbolic_factors

Triple = tuple  # three VarIds in increasing order

N = 2


def make_triple(*vs) -> Triple:
    vs = tuple(sorted(var_from_name(v) if isinstance(v, str) else v for v in vs))
    if len(vs) != 3 or len(set(vs)) != 3:
        raise ValueError("a triple needs three distinct variables")
    if vs[0] == VarId(1, 1, 1):
        raise ValueError("z1 never enters a triple")
    return vs


def triple_name(t: Triple) -> str:
    return "(" + ",".join(var_name(v) for v in t) + ")"


# -- vector fields --------------------------------------------------------


class VField:
    """Polynomial vector field ``sum coeff[v] * d/dv``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[VarId, MPoly] | None = None):
        self.coeffs = {v: c for v, c in (coeffs or {}).items() if not c.is_zero()}

    def apply(self, p: MPoly) -> MPoly:
        out = MPoly()
        for v, c in self.coeffs.items():
            d = p.diff(v)
            if d:
                out = out + c * d
        return out

    def __call__(self, p: MPoly) -> MPoly:
        return self.apply(p)

    def coeff(self, v: VarId) -> MPoly:
        return self.coeffs.get(v, MPoly())

    def __add__(self, other: "VField") -> "VField":
        acc = dict(self.coeffs)
        for v, c in other.coeffs.items():
            acc[v] = acc.get(v, MPoly()) + c
        return VField(acc)

    def scale(self, c) -> "VField":
        return VField({v: x * c for v, x in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, point: Mapping[VarId, object]) -> dict[VarId, object]:
        return {v: c.evaluate(point) for v, c in self.coeffs.items()}

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"({c.render()})*d/d{var_name(v)}" for v, c in sorted(self.coeffs.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, VField) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"VField({self.render()})"


def _minor(gp: Sequence[MPoly], gq: Sequence[MPoly], a: int, b: int) -> MPoly:
    return gp[a] * gq[b] - gp[b] * gq[a]


def d_field(P: MPoly, Q: MPoly, t: Triple) -> VField:
    """``det [[d/dx, d/dy, d/dz], grad P, grad Q]`` over the triple."""
    gp = [P.diff(v) for v in t]
    gq = [Q.diff(v) for v in t]
    return VField({
        t[0]: _minor(gp, gq, 1, 2),
        t[1]: -_minor(gp, gq, 0, 2),
        t[2]: _minor(gp, gq, 0, 1),
    })


# -- per-level symbolic data ------------------------------------------------


class Level:
    """``P^K`` for n = 2 with cached gradients and 2x2 gradient minors."""

    def __init__(self, K: int):
        self.K = K
        self.P = last_row(K, N)
        self.vars = jacobian_vars(K, N)
        self._grad: dict[VarId, tuple[MPoly, ...]] = {}
        self._minors: dict[tuple, MPoly] = {}

    def grad(self, v: VarId) -> tuple[MPoly, ...]:
        g = self._grad.get(v)
        if g is None:
            g = tuple(p.diff(v) for p in self.P)
            self._grad[v] = g
        return g

    def minor(self, i: int, j: int, u: VarId, v: VarId) -> MPoly:
        """``C_ij(u, v) = dP_i/du dP_j/dv - dP_i/dv dP_j/du`` (rows 1-based)."""
        key = (i, j, u, v)
        m = self._minors.get(key)
        if m is None:
            gu, gv = self.grad(u), self.grad(v)
            m = gu[i - 1] * gv[j - 1] - gv[i - 1] * gu[j - 1]
            self._minors[key] = m
        return m

    def field(self, i: int, j: int, t: Triple) -> VField:
        """``V_ij(t) = D_t(P_i, P_j)`` built from cached minors."""
        x, y, z = t
        return VField({x: self.minor(i, j, y, z), y: -self.minor(i, j, x, z), z: self.minor(i, j, x, y)})

    def det3(self, rows: Sequence[int], t: Triple) -> MPoly:
        """Determinant of gradient rows ``rows`` restricted to ``t``."""
        a, b, c = rows
        x, y, z = t
        return (self.grad(x)[a - 1] * self.minor(b, c, y, z)
                - self.grad(y)[a - 1] * self.minor(b, c, x, z)
                + self.grad(z)[a - 1] * self.minor(b, c, x, y))


@lru_cache(maxsize=None)
def level(K: int) -> Level:
    if K < 1:
        raise ValueError("K must be at least 1")
    return Level(K)


def governing_pair(K: int) -> tuple[int, int]:
    return (3, 4) if K % 2 == 0 else (1, 2)


def governing_field(K: int, t: Triple) -> VField:
    """The level-K determinant field (``V_34`` at even K, ``V_12`` at odd K)."""
    return level(K).field(*governing_pair(K), t)


def triples_at(K: int) -> list[Triple]:
    return list(itertools.combinations(level(K).vars, 3))


# -- complete triples ---------------------------------------------------------


def _quadratic(K: int, t: Triple) -> bool:
    i, j = governing_pair(K)
    lv = level(K)
    x, y, z = t
    return (lv.minor(i, j, y, z).degree(x) >= 2
            or lv.minor(i, j, x, z).degree(y) >= 2
            or lv.minor(i, j, x, y).degree(z) >= 2)


@lru_cache(maxsize=None)
def classify_triples(K: int) -> frozenset:
    """Triples whose governing field has no coefficient quadratic in its own
    integration variable."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return frozenset(t for t in triples_at(K) if not _quadratic(K, t))


def xi_set(K: int) -> frozenset:
    """Triples introduced on level K."""
    if K < 3:
        raise ValueError("K must be at least 3")
    if K == 3:
        return classify_triples(2)
    return classify_triples(K - 1) - classify_triples(K - 2)


def _group(f: int) -> list[VarId]:
    if f == 1:
        return [VarId(1, 1, 2), VarId(1, 2, 2)]
    return [VarId(f, 1, 1), VarId(f, 1, 2), VarId(f, 2, 2)]


def pattern_new_triples(K: int) -> frozenset:
    """The union patterns describing the triples new on level K (K >= 2)."""
    if K < 2:
        raise ValueError("K must be at least 2")
    new = _group(K)
    n1, n3 = new[0], new[-1]
    prev = _group(K - 1)
    out = {tuple(sorted(new))}
    out.add(tuple(sorted((prev[0], n1, n3))))
    out.add(tuple(sorted((prev[0], new[1], n3))))
    out.add(tuple(sorted((prev[-1], n1, new[1]))))
    out.add(tuple(sorted((prev[-1], n1, n3))))
    pairs = set()
    for f in range(1, K):
        pairs.update(itertools.combinations(_group(f), 2))
    for f in range(1, K - 1):
        g, h = _group(f), _group(f + 1)
        pairs.add((g[-1], h[0]))
        pairs.add((g[0], h[-1]))
    for a, b in pairs:
        for c in (n1, n3):
            out.add(tuple(sorted((a, b, c))))
    return frozenset(out)


@lru_cache(maxsize=None)
def pattern_triples(K: int) -> frozenset:
    if K < 2:
        raise ValueError("K must be at least 2")
    prev = pattern_triples(K - 1) if K > 2 else frozenset()
    return prev | pattern_new_triples(K)


T2_LISTED = frozenset(make_triple(*s.split()) for s in (
    "w1 w2 w3", "z2 w2 w3", "z3 w1 w2", "z2 w1 w3", "z3 w1 w3", "z2 z3 w1", "z2 z3 w3",
))


def triples_report(kmax: int) -> Report:
    """Base set, inclusion chain, and agreement with the union patterns."""
    rep = Report("complete triples")
    rep.check(classify_triples(2) == T2_LISTED, "T2 equals the seven listed triples",
              sorted(map(triple_name, T2_LISTED)), sorted(map(triple_name, classify_triples(2))))
    sizes = {}
    discrepancies = {}
    for K in range(2, kmax + 1):
        T = classify_triples(K)
        sizes[f"T{K}"] = len(T)
        if K > 2:
            prev = classify_triples(K - 1)
            rep.check(prev <= T, f"T{K - 1} subset of T{K}", "subset", sorted(map(triple_name, prev - T)))
        new_deg = T - (classify_triples(K - 1) if K > 2 else frozenset())
        new_pat = pattern_new_triples(K)
        only_deg = sorted(map(triple_name, new_deg - new_pat))
        only_pat = sorted(map(triple_name, new_pat - new_deg))
        if only_deg or only_pat:
            discrepancies[f"K={K}"] = {"degree_test_only": only_deg, "patterns_only": only_pat}
    rep.notes["sizes"] = sizes
    rep.notes["pattern_discrepancies"] = discrepancies
    return rep


# -- R-minors -----------------------------------------------------------------

_ROWS = {1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)}


def r_minor(K: int, t: Triple, j: int) -> MPoly:
    """Determinant of the level-K gradient rows with row ``j`` removed."""
    if j not in _ROWS:
        raise ValueError("j must be in 1..4")
    return level(K).det3(_ROWS[j], t)


def r_minor_direct(K: int, t: Triple, j: int) -> MPoly:
    """Same minor by plain differentiation and cofactor expansion."""
    from .polycore import poly_det

    P = last_row(K, N)
    rows = [[P[r - 1].diff(v) for v in t] for r in _ROWS[j]]
    return poly_det(rows)


def _old_triples(K: int) -> list[Triple]:
    return list(itertools.combinations(level(K - 1).vars, 3))


def verify_r_identities(kmax: int, triples: str = "all") -> Report:
    """Level-K minors against the level-(K-1) governing field.

    Odd K: ``R^{K,1} = D(P2)``, ``R^{K,2} = D(P1)``; even K:
    ``R^{K,3} = D(P4)``, ``R^{K,4} = D(P3)``; D is the level-(K-1) field.
    """
    rep = Report("R-minor identities")
    for K in range(3, kmax + 1):
        prev = level(K - 1)
        pairs = ((1, 2), (2, 1)) if K % 2 == 1 else ((3, 4), (4, 3))
        for t in _select(_old_triples(K), triples, K):
            D = governing_field(K - 1, t)
            for j, p in pairs:
                lhs = r_minor(K, t, j)
                rhs = D.apply(prev.P[p - 1])
                rep.check(lhs == rhs, f"K={K} j={j} t={triple_name(t)}", rhs.render(), lhs.render())
    return rep


def _select(ts: list[Triple], mode: str, K: int) -> list[Triple]:
    if mode == "all":
        return ts
    if mode == "complete":
        T = classify_triples(K - 1)
        return [t for t in ts if t in T]
    raise ValueError(mode)


def r_recursion_matrix(K: int) -> list[list[MPoly]]:
    """Unipotent matrix taking the level-K R-vector to level K+1 (old triples)."""
    one, zero = MPoly.const(1), MPoly()
    g = [MPoly.var(v) for v in _group(K + 1)]
    if K % 2 == 0:
        a, b, c = g
        return [[one, zero, zero, zero], [zero, one, zero, zero],
                [-a, b, one, zero], [b, -c, zero, one]]
    a, b, c = g
    return [[one, zero, -a, b], [zero, one, b, -c], [zero, zero, one, zero], [zero, zero, zero, one]]


def verify_r_recursions(kmax: int, triples: str = "all") -> Report:
    if kmax < 3:
        raise ValueError("kmax must be at least 3")
    rep = Report("R-minor recursions")
    for K in range(2, kmax):
        M = r_recursion_matrix(K)
        ts = list(itertools.combinations(level(K).vars, 3))
        if triples == "complete":
            ts = [t for t in ts if t in classify_triples(K)]
        for t in ts:
            low = [r_minor(K, t, j) for j in range(1, 5)]
            high = [r_minor(K + 1, t, j) for j in range(1, 5)]
            pred = [sum((M[r][c] * low[c] for c in range(4)), MPoly()) for r in range(4)]
            rep.check(pred == high, f"{K}->{K + 1} t={triple_name(t)}",
                      [p.render() for p in pred], [h.render() for h in high])
    return rep


# -- tangent fields -------------------------------------------------------


def _roles(K: int):
    """(A, B, X, Y) indices: A, B are the frozen rows, X, Y the moving ones."""
    return (3, 4, 1, 2) if K % 2 == 1 else (1, 2, 3, 4)


def _new_vars(K: int) -> list[VarId]:
    return _group(K)


def _check_triple(K: int, t: Triple, strict: bool) -> None:
    if K < 3:
        raise ValueError("K must be at least 3")
    allowed = xi_set(K) if strict else classify_triples(K - 1)
    if t not in allowed:
        where = "introduced on this level" if strict else "complete one level down"
        raise ValueError(f"triple {triple_name(t)} is not {where} (K={K})")


def _tangent_parts(K: int, t: Triple):
    prev = level(K - 1)
    a, b, x, y = _roles(K)
    D = governing_field(K - 1, t)
    A, B = prev.P[a - 1], prev.P[b - 1]
    DX, DY = D.apply(prev.P[x - 1]), D.apply(prev.P[y - 1])
    return D, A, B, DX, DY


class TangentField:
    """``scale * base + extra`` kept unexpanded so ``base(P)`` can be shared."""

    def __init__(self, scale: MPoly, base: VField, extra: VField):
        self.scale, self.base, self.extra = scale, base, extra

    def apply(self, p: MPoly, base_value: MPoly | None = None) -> MPoly:
        if base_value is None:
            base_value = self.base.apply(p)
        return self.scale * base_value + self.extra.apply(p)

    __call__ = apply

    def expand(self) -> VField:
        return self.base.scale(self.scale) + self.extra

    def coeff(self, v: VarId) -> MPoly:
        return self.scale * self.base.coeff(v) + self.extra.coeff(v)


def build_theta(K: int, t: Triple, printed_signs: bool = False, strict: bool = True) -> TangentField:
    """``A^2 D - A D(Y) d/dn2 + (B D(Y) - A D(X)) d/dn1``.

    ``printed_signs`` flips both correction terms (the variant that is
    not tangent; kept for the conformance check and as a mutation).
    ``strict=False`` accepts any triple complete one level down.
    """
    _check_triple(K, t, strict)
    D, A, B, DX, DY = _tangent_parts(K, t)
    s = -1 if printed_signs else 1
    n1, n2, _ = _new_vars(K)
    return TangentField(A * A, D, VField({n2: (A * DY).scale(-s), n1: (B * DY - A * DX).scale(s)}))


def build_phi(K: int, t: Triple, printed_signs: bool = False, strict: bool = True) -> TangentField:
    """``B^2 D - B D(X) d/dn2 + (A D(X) - B D(Y)) d/dn3``."""
    _check_triple(K, t, strict)
    D, A, B, DX, DY = _tangent_parts(K, t)
    s = -1 if printed_signs else 1
    _, n2, n3 = _new_vars(K)
    return TangentField(B * B, D, VField({n2: (B * DX).scale(-s), n3: (A * DX - B * DY).scale(s)}))


def build_gamma(K: int) -> VField:
    """``A^2 d/dn3 + B^2 d/dn1 - A B d/dn2``."""
    if K < 3:
        raise ValueError("K must be at least 3")
    prev = level(K - 1)
    a, b, _, _ = _roles(K)
    A, B = prev.P[a - 1], prev.P[b - 1]
    n1, n2, n3 = _new_vars(K)
    return VField({n3: A * A, n1: B * B, n2: -(A * B)})


def sign_conformance(K: int = 3) -> dict[str, bool]:
    """Which correction-term signs give tangency, checked on every triple
    introduced at level K."""
    result = {}
    for label, printed in (("printed", True), ("negated", False)):
        ok = True
        for t in sorted(xi_set(K)):
            for build in (build_theta, build_phi):
                fld = build(K, t, printed_signs=printed)
                if any(fld.apply(p) for p in level(K).P):
                    ok = False
        result[label] = ok
    return result


def tangency_suite(kmax: int, inject_sign_flip: bool = False) -> Report:
    """Every field built at level 3..kmax annihilates all ``P_i^L``, L <= kmax."""
    if kmax > 6:
        raise ValueError("kmax is capped at 6")
    rep = Report("tangency")
    for K in range(3, kmax + 1):
        gamma = build_gamma(K)
        for L in range(K, kmax + 1):
            for i, p in enumerate(level(L).P, start=1):
                _record(rep, f"gamma^{K} on P{i}^{L}", gamma.apply(p))
        for t in sorted(xi_set(K)):
            theta = build_theta(K, t, printed_signs=inject_sign_flip)
            phi = build_phi(K, t, printed_signs=inject_sign_flip)
            for L in range(K, kmax + 1):
                for i, p in enumerate(level(L).P, start=1):
                    dp = theta.base.apply(p)
                    _record(rep, f"theta{triple_name(t)}^{K} on P{i}^{L}", theta.apply(p, dp))
                    _record(rep, f"phi{triple_name(t)}^{K} on P{i}^{L}", phi.apply(p, dp))
    rep.notes["sign_conformance"] = {
        f"{parity}_{k}": v
        for parity, K in (("odd", 3), ("even", 4))
        for k, v in sign_conformance(K).items()
    }
    return rep


def _record(rep: Report, case: str, got: MPoly) -> None:
    rep.check(got.is_zero(), case, "0", got.render() if len(got) < 20 else f"<{len(got)} terms>")


# -- rank checks at points --------------------------------------------------


def _det3(m) -> Fraction:
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


class PointCalculus:
    """Numeric gradients of ``P^L`` at a point, for each level."""

    def __init__(self, point: Mapping[VarId, object]):
        self.point = point
        self._cache: dict[int, tuple[dict, list]] = {}

    def _level(self, L: int):
        hit = self._cache.get(L)
        if hit is None:
            jac = jacobian_at(self.point, L, N)
            cols = {v: [jac[r][c] for r in range(4)] for c, v in enumerate(jacobian_vars(L, N))}
            vals = evaluate_last_row(self.point, L, N)
            hit = (cols, vals)
            self._cache[L] = hit
        return hit

    def values(self, L: int) -> list:
        return self._level(L)[1]

    def r(self, L: int, t: Triple, j: int):
        cols, _ = self._level(L)
        rows = _ROWS[j]
        return _det3([[cols[v][r - 1] for v in t] for r in rows])

    def d_of(self, K: int, t: Triple, target: int):
        """Value of the level-K governing field applied to ``P_target^K``."""
        cols, _ = self._level(K)
        i, j = governing_pair(K)
        return _det3([[cols[v][r - 1] for v in t] for r in (target, i, j)])


def omega_rank(K: int, p: FiberPoint | Mapping[VarId, object]) -> int:
    """Exact rank of the 2 x |T_{K-1}| matrix of level-(K-1) R-minors."""
    if K < 3:
        raise ValueError("K must be at least 3")
    point = p.point if isinstance(p, FiberPoint) else p
    pc = PointCalculus(point)
    rows = (1, 2) if K % 2 == 1 else (3, 4)
    ts = sorted(classify_triples(K - 1))
    m = [[pc.r(K - 1, t, j) for t in ts] for j in rows]
    return exact_rank(m)


def stacked_rank(K: int, L: int, point: Mapping[VarId, object], pc: PointCalculus | None = None) -> int:
    """Rank of the 4 x |T_K| matrix of level-L R-minors at the point."""
    pc = pc or PointCalculus(point)
    ts = sorted(classify_triples(K))
    return exact_rank([[pc.r(L, t, j) for t in ts] for j in range(1, 5)])


def new_direction_vectors(K: int, point: Mapping[VarId, object], pc: PointCalculus | None = None):
    """Projections of theta, phi (t in T_{K-1}) and gamma onto the three new
    coordinates, evaluated at a point from the R-form of the coefficients."""
    pc = pc or PointCalculus(point)
    a, b, x, y = _roles(K)
    vals = pc.values(K - 1)
    A, B = vals[a - 1], vals[b - 1]
    vecs = [(B * B, -A * B, A * A)]
    for t in sorted(classify_triples(K - 1)):
        DX, DY = pc.d_of(K - 1, t, x), pc.d_of(K - 1, t, y)
        vecs.append((B * DY - A * DX, -A * DY, 0))
        vecs.append((0, -B * DX, A * DX - B * DY))
    return vecs


def spanning_check(K: int, p: FiberPoint | Mapping[VarId, object]) -> Report:
    point = p.point if isinstance(p, FiberPoint) else p
    rep = Report(f"spanning K={K}")
    target = evaluate_last_row(point, K, N)
    z2, z3 = point.get(VarId(1, 1, 2), 0), point.get(VarId(1, 2, 2), 0)
    label = classify_fiber(K, target).label
    if label not in (StratumLabel.GENERIC_SMOOTH, StratumLabel.GENERIC_SINGULAR) or z2 * z3 == 0:
        rep.notes["precondition"] = f"not applicable: {label.value}, z2*z3={z2 * z3}"
        return rep
    r = exact_rank(new_direction_vectors(K, point))
    rep.check(r == 3, f"K={K} target={[str(v) for v in target]}", 3, r)
    return rep


def generic_points(K: int, count: int, rng: random.Random) -> list[dict]:
    """Exact points on generic fibers with z2 z3 != 0: random points, and
    points on singular generic fibers at odd K."""
    pts = []
    while len(pts) < count:
        if K % 2 == 1 and len(pts) % 4 == 3:
            a = [rand_nonzero_rat(rng), rand_nonzero_rat(rng), Fraction(0), Fraction(1)]
            pt = fiber_point_for(K, a, rng).point
        else:
            pt = random_point(K, N, rng)
        tgt = evaluate_last_row(pt, K, N)
        if not any(tgt):
            continue
        if classify_fiber(K, tgt).label in (StratumLabel.GENERIC_SMOOTH, StratumLabel.GENERIC_SINGULAR):
            if pt[VarId(1, 1, 2)] * pt[VarId(1, 2, 2)] != 0:
                pts.append(pt)
    return pts


def spanning_suite(levels: Iterable[int], samples: int, seed: int) -> Report:
    rep = Report("spanning")
    rng = random.Random(seed)
    for K in levels:
        for pt in generic_points(K, samples, rng):
            rep.merge(spanning_check(K, pt))
    rep.suite = "spanning"
    return rep


def rank_stability_suite(samples: int, seed: int, kmax: int = 6, base: int = 2) -> Report:
    rep = Report("rank stability")
    rng = random.Random(seed)
    hist: dict[int, int] = {}
    for s in range(samples):
        pt = random_point(kmax, N, rng)
        if s % 3 == 1:
            # degenerate start: z3 = 0 lowers the base rank
            pt[VarId(1, 2, 2)] = Fraction(0)
        pc = PointCalculus(pt)
        ranks = [stacked_rank(base, L, pt, pc) for L in range(base, kmax + 1)]
        hist[ranks[0]] = hist.get(ranks[0], 0) + 1
        rep.check(len(set(ranks)) == 1, f"sample {s}", ranks[0], ranks)
    rep.notes["base_rank_histogram"] = {str(k): v for k, v in sorted(hist.items())}
    return rep


# -- z2 z3 witnesses --------------------------------------------------------


@dataclass(frozen=True)
class NotFound:
    reason: str


def z2z3_witness(K: int, a: Sequence, component: str | None = None,
                 seed: int = 0, tries: int = 200) -> FiberPoint | NotFound:
    """A point of the fiber over ``a`` with ``z2 z3 != 0``, or NotFound."""
    if K < 3:
        raise ValueError("K must be at least 3")
    a = [Fraction(x) for x in a]
    if not any(a):
        raise ValueError("a = 0 is not in the image")
    if K == 3:
        if a[2] == a[3] == 0 and (a[0] == 0 or a[1] == 0):
            return NotFound("K=3 with a=(a1,0,0,0) or (0,a2,0,0): z2=a1, z3=a2 are forced")
        if component == "A1":
            return NotFound("K=3 component A1: z2=z3=0 identically")
    elif component is not None:
        raise ValueError("components are defined for K = 3")
    rng = random.Random(seed)
    for _ in range(tries):
        try:
            fp = fiber_point_for(K, a, rng)
        except RuntimeError:
            continue
        if fp.value(VarId(1, 1, 2)) * fp.value(VarId(1, 2, 2)) != 0:
            return fp
    return NotFound(f"no witness in {tries} random completions")


# -- reference tables --------------------------------------------------------

TABLE1_ROWS = ["w1 w2 w3", "z2 w2 w3", "z3 w1 w2", "z2 w1 w3", "z3 w1 w3", "z2 z3 w1", "z2 z3 w3"]
TABLE1_COLS = ["z2", "z3", "w1", "w2", "w3"]
TABLE1_PRINTED = [
    ["0", "0", "z3^2", "-z2*z3", "z2^2"],
    ["z3^2", "0", "0", "-w1*z3", "w1*z2-w2*z3"],
    ["0", "z2^2", "z3*w3-w2*z2", "-z2*w3", "0"],
    ["z2*z3", "0", "-w1*z3", "0", "-z2*w2"],
    ["0", "z2*z3", "-w2*z3", "0", "-z2*w3"],
    ["-z2*w3", "z2*w2", "w1*w3-w2^2", "0", "0"],
    ["w2*z3", "w1*z3", "0", "0", "w1*w3-w2^2"],
]
TABLE2_COLS = ["R1", "R2", "R3", "R4"]
TABLE2_PRINTED = [
    ["0", "0", "0", "0"],
    ["0", "z3^2", "0", "0"],
    ["z2^2", "0", "0", "0"],
    ["0", "z2*z3", "0", "0"],
    ["z2*z3", "0", "0", "0"],
    ["z2*w2", "-z2*w3", "0", "z2"],
    ["-z3*w1", "z3*w2", "z3", "0"],
]
TABLE3_ROWS = ["P1", "P2", "P3", "P4"]
TABLE3_COLS = ["z2", "z3", "z5", "z6"]
TABLE3_PRINTED = [
    ["1+w1*z4", "w3*z4", "1", "0"],
    ["0", "1", "0", "1"],
    ["w1+w4+w1*w4*z4", "w2+w5+w2*w4*z4", "w4", "w5"],
    ["w2+w5+w1*w5*z4", "w3+w6+w2*w5*z4", "w5", "w6"],
]
# transcription cells known to disagree with the computation
KNOWN_ERRATA = frozenset({
    ("table1", "(z2,z3,w3)", "d/dz3"),
    ("table3", "P1", "d/dz3"),
})
# the set C: z2 = z3 = z5 = z6 = 0
SET_C = {var_from_name(v): 0 for v in ("z2", "z3", "z5", "z6")}


@dataclass
class Cell:
    table: str
    row: str
    col: str
    computed: MPoly
    printed: MPoly
    alt: MPoly  # the same cell by an independent route
    check: str = ""

    @property
    def matches(self) -> bool:
        return self.computed == self.printed

    @property
    def confirmed_erratum(self) -> bool:
        """A known erratum whose machine check holds."""
        return (not self.matches and (self.table, self.row, self.col) in KNOWN_ERRATA
                and self.computed == self.alt and bool(self.check))


def _row_triple(s: str) -> Triple:
    return make_triple(*s.split())


def _table1_cells(printed) -> list[Cell]:
    lv = level(2)
    cells = []
    for r, row in enumerate(TABLE1_ROWS):
        t = _row_triple(row)
        fld = governing_field(2, t)
        alt = d_field(lv.P[2], lv.P[3], t)
        for c, col in enumerate(TABLE1_COLS):
            v = var_from_name(col)
            cell = Cell("table1", triple_name(t), f"d/d{col}", fld.coeff(v), parse_poly(printed[r][c]), alt.coeff(v))
            if not cell.matches:
                coeffs = dict(fld.coeffs)
                coeffs[v] = cell.printed
                broken = VField(coeffs)
                bad = [f"P{i}" for i in (3, 4) if broken.apply(lv.P[i - 1])]
                if bad:
                    cell.check = f"printed field is not tangent: it does not annihilate {', '.join(bad)}"
            cells.append(cell)
    return cells


def _table2_cells(printed) -> list[Cell]:
    cells = []
    for r, row in enumerate(TABLE1_ROWS):
        t = _row_triple(row)
        for j in range(1, 5):
            computed = r_minor(2, t, j)
            alt = r_minor_direct(2, t, j)
            cell = Cell("table2", triple_name(t), f"R{j}", computed, parse_poly(printed[r][j - 1]), alt)
            if not cell.matches:
                cell.check = "differs from the directly expanded determinant"
            cells.append(cell)
    return cells


def _table3_cells(printed) -> list[Cell]:
    lv = level(4)
    direct = psi_product(symbolic_factors(4, N))[-1]
    cells = []
    for r, row in enumerate(TABLE3_ROWS):
        for c, col in enumerate(TABLE3_COLS):
            v = var_from_name(col)
            computed = lv.P[r].diff(v).subs(SET_C)
            alt = direct[r].diff(v).subs(SET_C)
            cell = Cell("table3", row, f"d/d{col}", computed, parse_poly(printed[r][c]), alt)
            if not cell.matches:
                cell.check = "differs from the derivative of the full matrix product"
            cells.append(cell)
    return cells


def regen_tables(printed1=TABLE1_PRINTED, printed2=TABLE2_PRINTED, printed3=TABLE3_PRINTED) -> dict[str, list[Cell]]:
    return {
        "table1": _table1_cells(printed1),
        "table2": _table2_cells(printed2),
        "table3": _table3_cells(printed3),
    }


def render_table(cells: Sequence[Cell], which: str = "computed") -> str:
    lines = []
    for cell in cells:
        val = getattr(cell, which)
        lines.append(f"{cell.table} {cell.row} {cell.col}: {val.render()}")
    return "\n".join(lines) + "\n"


def table_diff(tables: Mapping[str, Sequence[Cell]]) -> list[dict]:
    out = []
    for cells in tables.values():
        for cell in cells:
            if not cell.matches:
                out.append({
                    "table": cell.table,
                    "cell": f"{cell.row} {cell.col}",
                    "printed": cell.printed.render(),
                    "computed": cell.computed.render(),
                    "status": "confirmed erratum" if cell.confirmed_erratum else "mismatch",
                    "check": cell.check,
                })
    return out
