"""Elementary symplectic matrices, alternating products and last rows.

Matrices are plain nested lists whose entries are either :class:`MPoly`
values or exact/complex scalars, so the same code serves symbolic and
numeric work.  ``0`` and ``1`` are used as the neutral entries; they mix
freely with both kinds.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import MPoly, VarId

__all__ = [
    "Parity",
    "ElemFactor",
    "symbolic_factor",
    "symbolic_factors",
    "elem_matrix",
    "identity",
    "mat_mul",
    "mat_sub",
    "is_zero_matrix",
    "symplectic_violations",
    "is_symplectic",
    "psi_product",
    "last_row",
    "last_row_of",
    "whitehead_factors",
    "printed_whitehead_factors",
    "whitehead_lhs",
    "psi_embed",
    "transvection_factor",
    "matrix_to_json",
    "matrix_from_json",
]


class Parity(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"

    def flip(self) -> "Parity":
        return Parity.UPPER if self is Parity.LOWER else Parity.LOWER


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, MPoly) else x == 0


@dataclass(frozen=True)
class ElemFactor:
    """One elementary symplectic factor.

    ``params`` is the symmetric block ``U``: Lower embeds as
    ``[[I, 0], [U, I]]`` and Upper as ``[[I, U], [0, I]]``.
    """

    parity: Parity
    params: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.params)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("parameter block must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if not _is_zero(rows[i][j] - rows[j][i]):
                    raise ValueError("parameter block must be symmetric")
        object.__setattr__(self, "params", rows)

    @property
    def n(self) -> int:
        return len(self.params)

    @property
    def is_lower(self) -> bool:
        return self.parity is Parity.LOWER

    def matrix(self) -> list[list]:
        return elem_matrix(self)

    def negated(self) -> "ElemFactor":
        """The inverse factor."""
        return ElemFactor(self.parity, tuple(tuple(-x for x in r) for r in self.params))

    def is_trivial(self, tol: float = 0.0) -> bool:
        return all(
            _is_zero(x) if tol == 0 or isinstance(x, MPoly) else abs(x) <= tol
            for r in self.params
            for x in r
        )

    def to_numpy(self) -> np.ndarray:
        n = self.n
        m = np.eye(2 * n, dtype=complex)
        u = np.array(self.params, dtype=complex)
        if self.is_lower:
            m[n:, :n] = u
        else:
            m[:n, n:] = u
        return m


def symbolic_factor(k: int, n: int, parity: Parity | None = None) -> ElemFactor:
    """Factor number ``k`` with parameters ``VarId(k, i, j)``."""
    if parity is None:
        parity = Parity.LOWER if k % 2 == 1 else Parity.UPPER
    u = [[MPoly.var(VarId.make(k, i + 1, j + 1)) for j in range(n)] for i in range(n)]
    return ElemFactor(parity, u)


def symbolic_factors(K: int, n: int) -> list[ElemFactor]:
    return [symbolic_factor(k, n) for k in range(1, K + 1)]


def identity(size: int) -> list[list]:
    return [[1 if i == j else 0 for j in range(size)] for i in range(size)]


def elem_matrix(f: ElemFactor, n: int | None = None) -> list[list]:
    if n is not None and n != f.n:
        raise ValueError(f"factor has n={f.n}, expected {n}")
    n = f.n
    m = identity(2 * n)
    for i in range(n):
        for j in range(n):
            if f.is_lower:
                m[n + i][j] = f.params[i][j]
            else:
                m[i][n + j] = f.params[i][j]
    return m


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*b))
    out = []
    for row in a:
        new = []
        for col in cols:
            acc = 0
            for x, y in zip(row, col):
                # skip literal zeros: keeps symbolic products sparse
                if not (type(x) is int and x == 0) and not (type(y) is int and y == 0):
                    acc = acc + x * y
            new.append(acc)
        out.append(new)
    return out


def mat_sub(a, b) -> list[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def transpose(m) -> list[list]:
    return [list(c) for c in zip(*m)]


def is_zero_matrix(m) -> bool:
    return all(_is_zero(x) for row in m for x in row)


def _blocks(m):
    size = len(m)
    if size % 2 or any(len(r) != size for r in m):
        raise ValueError("symplectic test needs a square matrix of even size")
    n = size // 2
    a = [r[:n] for r in m[:n]]
    b = [r[n:] for r in m[:n]]
    c = [r[:n] for r in m[n:]]
    d = [r[n:] for r in m[n:]]
    return n, a, b, c, d


def symplectic_violations(m, tol: float | None = None) -> list[str]:
    """Names of the violated block identities (empty list when symplectic).

    ``tol=None`` means exact comparison.
    """
    n, a, b, c, d = _blocks(m)
    at, ct, bt = transpose(a), transpose(c), transpose(b)
    checks = [
        ("AᵀC ≠ CᵀA", mat_sub(mat_mul(at, c), mat_mul(ct, a))),
        ("BᵀD ≠ DᵀB", mat_sub(mat_mul(bt, d), mat_mul(transpose(d), b))),
        ("AᵀD − CᵀB ≠ I", mat_sub(mat_sub(mat_mul(at, d), mat_mul(ct, b)), identity(n))),
    ]
    bad = []
    for name, diff in checks:
        if tol is None:
            ok = is_zero_matrix(diff)
        else:
            ok = all(abs(x) <= tol for row in diff for x in row)
        if not ok:
            bad.append(name)
    return bad


def is_symplectic(m, tol: float | None = None) -> bool:
    return not symplectic_violations(m, tol)


def _check_alternating(factors: Sequence[ElemFactor], upper_first: bool) -> None:
    first = Parity.UPPER if upper_first else Parity.LOWER
    for k, f in enumerate(factors):
        expected = first if k % 2 == 0 else first.flip()
        if f.parity is not expected:
            raise ValueError(f"factor {k + 1} is {f.parity.value}, expected {expected.value}")
        if f.n != factors[0].n:
            raise ValueError("factors have inconsistent sizes")


def psi_product(factors: Sequence[ElemFactor], n: int | None = None,
                upper_first: bool = False) -> list[list]:
    """Exact product of an alternating factor list (Lower first by default)."""
    _check_alternating(factors, upper_first)
    if not factors:
        if n is None:
            raise ValueError("n is required for an empty product")
        return identity(2 * n)
    out = elem_matrix(factors[0])
    for f in factors[1:]:
        out = mat_mul(out, elem_matrix(f))
    return out


def last_row_of(factors: Sequence[ElemFactor], n: int | None = None) -> list:
    """Transposed last row of the product, built factor by factor.

    Lower ``U`` acts as ``top += U bot``, Upper as ``bot += U top``.
    Parities are taken from the factors, so any pattern is accepted.
    """
    if n is None:
        if not factors:
            raise ValueError("n is required for an empty product")
        n = factors[0].n
    top = [0] * n
    bot = [0] * (n - 1) + [1]
    for f in factors:
        u = f.params
        if f.is_lower:
            top = [top[i] + _dot(u[i], bot) for i in range(n)]
        else:
            bot = [bot[i] + _dot(u[i], top) for i in range(n)]
    return [_lift(x) for x in top + bot]


def _dot(row, vec):
    acc = 0
    for x, y in zip(row, vec):
        if not (type(y) is int and y == 0):
            acc = acc + x * y
    return acc


def _lift(x):
    return x if isinstance(x, MPoly) else MPoly.const(x) if isinstance(x, (int, Fraction)) else x


def last_row(K: int, n: int) -> list[MPoly]:
    """Symbolic ``P^K`` for the alternating pattern starting with Lower."""
    if K < 1:
        raise ValueError("K must be at least 1")
    return last_row_of(symbolic_factors(K, n), n)


def printed_whitehead_factors(a) -> list[ElemFactor]:
    """The four factors exactly as displayed in the source; their product is
    ``whitehead_lhs(-a)``, not ``whitehead_lhs(a)``."""
    return [
        ElemFactor(Parity.LOWER, [[-a, -1], [-1, 0]]),
        ElemFactor(Parity.UPPER, [[0, 0], [0, -a]]),
        ElemFactor(Parity.LOWER, [[0, 1], [1, 0]]),
        ElemFactor(Parity.UPPER, [[0, 0], [0, a]]),
    ]


def whitehead_factors(a) -> list[ElemFactor]:
    """Four elementary factors whose product is :func:`whitehead_lhs` at ``a``."""
    return printed_whitehead_factors(-a)


def whitehead_lhs(a) -> list[list]:
    return [[1, 0, 0, 0], [a, 1, 0, 0], [0, 0, 1, -a], [0, 0, 0, 1]]


def psi_embed(m, tol: float | None = None) -> list[list]:
    """Standard inclusion of SL2 into Sp4 on rows/columns 1 and 3."""
    (a, b), (c, d) = m
    det = a * d - b * c
    if tol is None:
        ok = det == 1 if not isinstance(det, MPoly) else det == MPoly.const(1)
    else:
        ok = abs(det - 1) <= tol
    if not ok:
        raise ValueError(f"not unimodular: det = {det}")
    return [[a, 0, b, 0], [0, 1, 0, 0], [c, 0, d, 0], [0, 0, 0, 1]]


def transvection_factor(lower: bool, u) -> ElemFactor:
    """Image under the inclusion of ``[[1,0],[u,1]]`` (lower) or ``[[1,u],[0,1]]``."""
    return ElemFactor(Parity.LOWER if lower else Parity.UPPER, [[u, 0], [0, 0]])


# -- JSON ---------------------------------------------------------------


def _num_str(x: float) -> str:
    return repr(float(x))


def matrix_to_json(m, exact: bool = False) -> dict:
    size = len(m)
    if exact:
        entries = [[str(Fraction(x)) for x in row] for row in m]
    else:
        entries = [[[_num_str(complex(x).real), _num_str(complex(x).imag)] for x in row] for row in m]
    return {"n": size // 2, "entries": entries}


def _parse_scalar(x):
    if isinstance(x, list):
        if len(x) != 2:
            raise ValueError(f"complex entry must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, float)):
        return x
    raise ValueError(f"cannot parse matrix entry {x!r}")


def matrix_from_json(obj: dict) -> list[list]:
    try:
        n = int(obj["n"])
        rows = [[_parse_scalar(x) for x in row] for row in obj["entries"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if len(rows) != 2 * n or any(len(r) != 2 * n for r in rows):
        raise ValueError(f"expected a {2 * n}x{2 * n} matrix")
    return rows
