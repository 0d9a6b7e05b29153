"""Exact sparse multivariate polynomials over the rationals.

Variables are :class:`VarId` triples ``(factor, i, j)``: entry ``(i, j)``,
``i <= j``, of the symmetric parameter block of elementary factor number
``factor``.  Polynomials are immutable; every operation returns a new value.

Internally a monomial is packed into a single Python integer with one
16-bit exponent slot per variable, so monomial multiplication is integer
addition.  Coefficients are ``int`` whenever possible and ``Fraction``
otherwise.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "VarId",
    "MPoly",
    "PolyMatrix",
    "poly_mul",
    "poly_diff",
    "poly_det",
    "exact_rank",
    "parse_poly",
    "var_name",
    "var_from_name",
    "transpose",
]

_BITS = 16
_MASK = (1 << _BITS) - 1


class VarId(NamedTuple):
    """Entry ``(i, j)`` of the parameter block of factor ``factor`` (1-based).

    Tuple ordering is the fixed variable order ``(factor, i, j)``.
    """

    factor: int
    i: int
    j: int

    @classmethod
    def make(cls, factor: int, i: int, j: int) -> "VarId":
        if i > j:
            i, j = j, i
        if factor < 1 or i < 1:
            raise ValueError(f"invalid variable ({factor}, {i}, {j})")
        return cls(factor, i, j)

    @property
    def is_lower(self) -> bool:
        # odd factors are lower-triangular (z variables) in the default pattern
        return self.factor % 2 == 1


def _tri(i: int, j: int) -> int:
    return j * (j - 1) // 2 + (i - 1)


def _untri(t: int) -> tuple[int, int]:
    j = (1 + math.isqrt(8 * t + 1)) // 2
    while j * (j - 1) // 2 > t:
        j -= 1
    return t - j * (j - 1) // 2 + 1, j


def _pos(v: VarId) -> int:
    a, b = v.factor - 1, _tri(v.i, v.j)
    return (a + b) * (a + b + 1) // 2 + b


def _unpos(p: int) -> VarId:
    w = (math.isqrt(8 * p + 1) - 1) // 2
    b = p - w * (w + 1) // 2
    a = w - b
    i, j = _untri(b)
    return VarId(a + 1, i, j)


_POS_CACHE: dict[VarId, int] = {}
_VAR_CACHE: dict[int, VarId] = {}


def _shift(v: VarId) -> int:
    s = _POS_CACHE.get(v)
    if s is None:
        s = _pos(v) * _BITS
        _POS_CACHE[v] = s
    return s


def _var_at(shift: int) -> VarId:
    v = _VAR_CACHE.get(shift)
    if v is None:
        v = _unpos(shift // _BITS)
        _VAR_CACHE[shift] = v
    return v


def _decompose(m: int) -> tuple[tuple[int, int], ...]:
    """Split a packed monomial into ``(shift, exponent)`` pairs."""
    out = []
    while m:
        low = (m & -m).bit_length() - 1
        s = low - low % _BITS
        e = (m >> s) & _MASK
        out.append((s, e))
        m -= e << s
    return tuple(out)


def _norm(c):
    if type(c) is int:
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, Rational):
        return _norm(Fraction(c))
    raise TypeError(f"coefficients must be rational, got {type(c).__name__}")


class MPoly:
    """Sparse polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash", "_split")

    def __init__(self, terms: Mapping[int, object] | None = None):
        # trusted constructor: packed monomial -> nonzero normalised coefficient
        self._terms: dict[int, object] = dict(terms) if terms else {}
        self._hash = None
        self._split = None

    # -- construction -------------------------------------------------
    @classmethod
    def var(cls, v: VarId) -> "MPoly":
        return cls({1 << _shift(v): 1})

    @classmethod
    def const(cls, c) -> "MPoly":
        c = _norm(c)
        return cls({0: c} if c else None)

    @classmethod
    def from_terms(cls, items: Iterable[tuple[Mapping[VarId, int], object]]) -> "MPoly":
        acc: dict[int, object] = {}
        for expo, c in items:
            m = 0
            for v, e in expo.items():
                if e < 0 or e > _MASK:
                    raise ValueError(f"exponent {e} out of range")
                m += e << _shift(v)
            acc[m] = acc.get(m, 0) + _norm(c)
        return cls({m: _norm(c) for m, c in acc.items() if c})

    # -- basic protocol -----------------------------------------------
    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 0 in self._terms)

    def constant_term(self):
        return self._terms.get(0, 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, MPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({0: _norm(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"MPoly({self.render()!r})"

    def __str__(self) -> str:
        return self.render()

    # -- arithmetic ---------------------------------------------------
    @staticmethod
    def _coerce(x) -> "MPoly | None":
        if isinstance(x, MPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return MPoly.const(x)
        return None

    def __neg__(self) -> "MPoly":
        return MPoly({m: -c for m, c in self._terms.items()})

    def __pos__(self) -> "MPoly":
        return self

    def __add__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if len(o._terms) > len(self._terms):
            a, b = o._terms, self._terms
        else:
            a, b = self._terms, o._terms
        res = dict(a)
        for m, c in b.items():
            s = res.get(m, 0) + c
            if s:
                res[m] = _norm(s)
            else:
                res.pop(m, None)
        return MPoly(res)

    __radd__ = __add__

    def __sub__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._terms, o._terms
        if not a or not b:
            return MPoly()
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            ((mb, cb),) = b.items()
            if mb == 0 and cb == 1:
                return MPoly(a)
            return MPoly({m + mb: _norm(c * cb) for m, c in a.items()})
        res: dict[int, object] = {}
        get = res.get
        for m2, c2 in b.items():
            for m1, c1 in a.items():
                m = m1 + m2
                res[m] = get(m, 0) + c1 * c2
        return MPoly({m: _norm(c) for m, c in res.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "MPoly":
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers")
        result, base = MPoly.const(1), self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def scale(self, c) -> "MPoly":
        c = _norm(c)
        if not c:
            return MPoly()
        return MPoly({m: _norm(x * c) for m, x in self._terms.items()})

    # -- calculus and structure ---------------------------------------
    def diff(self, v: VarId) -> "MPoly":
        s = _shift(v)
        one = 1 << s
        res = {}
        for m, c in self._terms.items():
            e = (m >> s) & _MASK
            if e:
                res[m - one] = c * e if e > 1 else c
        return MPoly(res)

    def degree(self, v: VarId) -> int:
        """Degree in ``v`` (``-1`` for the zero polynomial)."""
        if not self._terms:
            return -1
        s = _shift(v)
        return max((m >> s) & _MASK for m in self._terms)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e for _, e in _decompose(m)) for m in self._terms)

    def variables(self) -> list[VarId]:
        acc = 0
        for m in self._terms:
            acc |= m
        seen = set()
        while acc:
            low = (acc & -acc).bit_length() - 1
            s = low - low % _BITS
            seen.add(_var_at(s))
            acc &= ~(_MASK << s)
        return sorted(seen)

    def terms(self) -> list[tuple[dict[VarId, int], object]]:
        """Terms as ``({var: exp}, coeff)`` pairs in canonical (lex) order."""
        return [(dict(expo), c) for expo, c in self._sorted_terms()]

    def _split_terms(self):
        if self._split is None:
            self._split = [(_decompose(m), c) for m, c in self._terms.items()]
        return self._split

    def evaluate(self, values: Mapping[VarId, object]):
        """Evaluate at a point; ``values`` must cover every variable present."""
        by_shift = {}
        for s_e, _ in self._split_terms():
            for s, _e in s_e:
                if s not in by_shift:
                    by_shift[s] = values[_var_at(s)]
        total = 0
        powers: dict[tuple[int, int], object] = {}
        for s_e, c in self._split_terms():
            t = c
            for s, e in s_e:
                if e == 1:
                    t = t * by_shift[s]
                else:
                    key = (s, e)
                    p = powers.get(key)
                    if p is None:
                        p = by_shift[s] ** e
                        powers[key] = p
                    t = t * p
            total = total + t
        return total

    def subs(self, values: Mapping[VarId, object]) -> "MPoly":
        """Substitute rational values for some variables."""
        fixed = {_shift(v): _norm(x) for v, x in values.items()}
        res: dict[int, object] = {}
        for m, c in self._terms.items():
            rest, coef = m, c
            for s, e in _decompose(m):
                if s in fixed:
                    coef = coef * fixed[s] ** e
                    rest -= e << s
                    if not coef:
                        break
            if coef:
                res[rest] = res.get(rest, 0) + coef
        return MPoly({m: _norm(c) for m, c in res.items() if c})

    def _leading(self):
        """Leading term under lex order on the fixed variable order."""
        best = None
        bkey = None
        for m, c in self._terms.items():
            key = _lex_key(m)
            if bkey is None or key < bkey:
                best, bkey = (m, c), key
        return best

    def exact_div(self, other: "MPoly") -> "MPoly":
        """Quotient of an exact division; raises if ``other`` does not divide."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lm_b, lc_b = other._leading()
        b_split = _decompose(lm_b)
        rem = self
        quot: dict[int, object] = {}
        while rem:
            lm_r, lc_r = rem._leading()
            r = dict(_decompose(lm_r))
            for s, e in b_split:
                if r.get(s, 0) < e:
                    raise ArithmeticError("polynomial division is not exact")
            m = lm_r - lm_b
            c = _norm(Fraction(lc_r) / lc_b)
            quot[m] = c
            rem = rem - MPoly({m: c}) * other
        return MPoly(quot)

    # -- rendering ----------------------------------------------------
    def _sorted_terms(self):
        items = []
        for m, c in self._terms.items():
            expo = tuple(sorted((_var_at(s), e) for s, e in _decompose(m)))
            items.append((expo, c))
        items.sort(key=lambda t: _lex_key_from_expo(t[0]))
        return items

    def render(self, n: int = 2) -> str:
        """Canonical text: lex-sorted terms, factors joined by ``*``."""
        if not self._terms:
            return "0"
        parts = []
        for expo, c in self._sorted_terms():
            mono = "*".join(
                var_name(v, n) + (f"^{e}" if e > 1 else "") for v, e in expo
            )
            neg = c < 0
            mag = -c if neg else c
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("-" if neg else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _lex_key_from_expo(expo) -> tuple:
    # lex-descending: larger exponent of the earliest variable comes first
    key = []
    for v, e in expo:
        key.append((v, -e))
    key.append((VarId(1 << 30, 0, 0), 0))
    return tuple(key)


def _lex_key(m: int) -> tuple:
    return _lex_key_from_expo(tuple(sorted((_var_at(s), e) for s, e in _decompose(m))))


PolyMatrix = list  # rows of MPoly; kept as plain nested lists


# -- names ---------------------------------------------------------------

_FLAT = {(1, 1): 0, (1, 2): 1, (2, 2): 2}
_UNFLAT = {v: k for k, v in _FLAT.items()}


def var_name(v: VarId, n: int = 2) -> str:
    """Flat ``z_i``/``w_i`` names for n = 2, ``z<k>_<ij>`` otherwise."""
    letter = "z" if v.factor % 2 == 1 else "w"
    group = (v.factor + 1) // 2
    if n == 2 and (v.i, v.j) in _FLAT:
        return f"{letter}{3 * group - 2 + _FLAT[(v.i, v.j)]}"
    return f"{letter}{group}_{v.i}{v.j}"


_NAME_RE = re.compile(r"([zw])(\d+)(?:_(\d)(\d))?$")


def var_from_name(name: str) -> VarId:
    mt = _NAME_RE.match(name)
    if not mt:
        raise ValueError(f"bad variable name {name!r}")
    letter, num, i, j = mt.groups()
    num = int(num)
    if i is None:
        group = (num + 2) // 3
        ij = _UNFLAT[(num - 1) % 3]
    else:
        group, ij = num, (int(i), int(j))
    factor = 2 * group - 1 if letter == "z" else 2 * group
    return VarId.make(factor, *ij)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([zw]\d+(?:_\d\d)?)|(\S))")


def parse_poly(text: str) -> MPoly:
    """Parse ``+ - * ^ ( )`` expressions over z/w names and rationals.

    Juxtaposition (``w1z3``) is not accepted; write ``w1*z3``.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            break
        pos = mt.end()
        num, name, op = mt.groups()
        if num is not None:
            tokens.append(("num", Fraction(num)))
        elif name is not None:
            tokens.append(("var", var_from_name(name)))
        else:
            tokens.append(("op", op))
    tokens.append(("end", None))
    idx = 0

    def peek():
        return tokens[idx]

    def take():
        nonlocal idx
        tok = tokens[idx]
        idx += 1
        return tok

    def expr():
        sign = 1
        if peek() == ("op", "-"):
            take()
            sign = -1
        elif peek() == ("op", "+"):
            take()
        acc = term() * sign
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term():
        acc = power()
        while peek() == ("op", "*"):
            take()
            acc = acc * power()
        return acc

    def power():
        base = atom()
        if peek() == ("op", "^"):
            take()
            kind, val = take()
            if kind != "num" or val.denominator != 1:
                raise ValueError("exponent must be an integer")
            return base ** int(val)
        return base

    def atom():
        kind, val = take()
        if kind == "num":
            return MPoly.const(val)
        if kind == "var":
            return MPoly.var(val)
        if (kind, val) == ("op", "("):
            inner = expr()
            if take() != ("op", ")"):
                raise ValueError("unbalanced parentheses")
            return inner
        if (kind, val) == ("op", "-"):
            return -atom()
        raise ValueError(f"unexpected token {val!r} in {text!r}")

    result = expr()
    if peek()[0] != "end":
        raise ValueError(f"trailing input in {text!r}")
    return result


# -- operations ---------------------------------------------------------


def poly_mul(a: MPoly, b: MPoly) -> MPoly:
    return a * b


def poly_diff(p: MPoly, v: VarId) -> MPoly:
    return p.diff(v)


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*m)]


def _det3(m):
    if len(m) == 1:
        return m[0][0]
    if len(m) == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def _div(a, b):
    if isinstance(a, MPoly):
        if isinstance(b, MPoly):
            return a.exact_div(b)
        return a.scale(Fraction(1) / b)
    return Fraction(a) / b if isinstance(a, int) and isinstance(b, int) else a / b


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, MPoly) else x == 0


def poly_det(m: Sequence[Sequence]):
    """Determinant of a square matrix of polynomials (or exact scalars).

    Cofactor expansion up to 3x3, Bareiss fraction-free elimination above.
    """
    size = len(m)
    if any(len(row) != size for row in m):
        raise ValueError("determinant of a non-square matrix")
    if size == 0:
        return MPoly.const(1)
    if size <= 3:
        d = _det3(m)
        return d if isinstance(d, MPoly) else MPoly.const(d)
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(size - 1):
        if _is_zero(a[k][k]):
            for r in range(k + 1, size):
                if not _is_zero(a[r][k]):
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return MPoly()
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = _div(a[i][j] * a[k][k] - a[i][k] * a[k][j], prev)
        prev = a[k][k]
    d = a[-1][-1] * sign
    return d if isinstance(d, MPoly) else MPoly.const(d)


def exact_rank(m: Sequence[Sequence]) -> int:
    """Rank over the rationals by exact Gaussian elimination."""
    rows = [[Fraction(x) for x in row] for row in m]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        inv = 1 / p[col]
        for r in range(rank + 1, len(rows)):
            f = rows[r][col]
            if f:
                f = f * inv
                rows[r] = [x - f * y for x, y in zip(rows[r], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank
