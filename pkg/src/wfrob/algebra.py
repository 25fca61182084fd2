"""Exact arithmetic substrate.

Sparse multivariate Laurent polynomials over ``fractions.Fraction``,
reduction of symmetric polynomials to elementary symmetric ones, weighted
monomial enumeration and exact linear solving.

Exponential markers
-------------------
A :class:`VarTable` may declare some of its variables as *markers*: a marker
``E`` stands for ``exp(c_1*x_1 + ... )`` where the ``x_i`` are other
(coordinate) variables of the same table.  Differentiating with respect to a
coordinate then acts on markers as an Euler operator.  This keeps objects such
as ``2*y2*E1`` with ``E1 = exp(y3)`` inside a purely polynomial engine.
"""

from __future__ import annotations

import math
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

NEG_INF = float("-inf")

Exponent = tuple[int, ...]


class AlgebraError(Exception):
    pass


class NotSymmetric(AlgebraError):
    pass


class NonTerminating(AlgebraError):
    pass


class InfiniteBasis(AlgebraError):
    pass


class NotDivisible(AlgebraError):
    pass


class Singular(AlgebraError):
    def __init__(self, msg: str, pivot: tuple[int, int] | None = None):
        super().__init__(msg)
        self.pivot = pivot


class Inconsistent(AlgebraError):
    def __init__(self, msg: str, pivot: tuple[int, int] | None = None):
        super().__init__(msg)
        self.pivot = pivot


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def render_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class VarTable:
    """Ordered variable names; ``markers`` maps a marker name to its exponent.

    ``markers`` is a tuple of ``(marker, ((coordinate, coefficient), ...))``.
    """

    names: tuple[str, ...]
    markers: tuple[tuple[str, tuple[tuple[str, Fraction], ...]], ...] = ()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        index = {n: i for i, n in enumerate(self.names)}
        for m, form in self.markers:
            if m not in index:
                raise ValueError(f"marker {m} is not a registered variable")
            for c, _ in form:
                if c not in index:
                    raise ValueError(f"marker {m} refers to unknown coordinate {c}")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r} (table {self.names})") from None

    @property
    def marker_names(self) -> tuple[str, ...]:
        return tuple(m for m, _ in self.markers)

    @property
    def coordinates(self) -> tuple[str, ...]:
        ms = set(self.marker_names)
        return tuple(n for n in self.names if n not in ms)

    def marker_form(self, marker: str) -> dict[str, Fraction]:
        for m, form in self.markers:
            if m == marker:
                return {c: Fraction(v) for c, v in form}
        raise KeyError(marker)

    def derivation(self, coord: str) -> list[tuple[int, Fraction, bool]]:
        """Actions of d/d(coord): list of (var index, factor, is_euler)."""
        acts = [(self.index(coord), Fraction(1), False)]
        for m, form in self.markers:
            for c, v in form:
                if c == coord and v != 0:
                    acts.append((self.index(m), Fraction(v), True))
        return acts

    def complete(self, values: Mapping[str, complex]) -> dict[str, complex]:
        """Fill in marker values from coordinate values where missing."""
        out = dict(values)
        for m, form in self.markers:
            if m not in out:
                out[m] = np.exp(sum(float(v) * out[c] for c, v in form))
        return out


class LaurentPoly:
    """Sparse Laurent polynomial with exact rational coefficients.

    Instances are treated as immutable.  ``terms`` maps exponent tuples (one
    slot per variable of ``table``) to nonzero ``Fraction`` coefficients.
    """

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: Mapping[Exponent, Fraction] | None = None):
        self.table = table
        if terms is None:
            self.terms: dict[Exponent, Fraction] = {}
        else:
            n = len(table)
            clean = {}
            for e, c in terms.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match table of size {n}")
                if c:
                    clean[tuple(e)] = as_fraction(c)
            self.terms = clean

    @classmethod
    def _raw(cls, table: VarTable, terms: dict) -> "LaurentPoly":
        p = object.__new__(cls)
        p.table = table
        p.terms = terms
        return p

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, table: VarTable) -> "LaurentPoly":
        return cls._raw(table, {})

    @classmethod
    def constant(cls, table: VarTable, c) -> "LaurentPoly":
        c = as_fraction(c)
        return cls._raw(table, {(0,) * len(table): c} if c else {})

    @classmethod
    def var(cls, table: VarTable, name: str, power: int = 1) -> "LaurentPoly":
        e = [0] * len(table)
        e[table.index(name)] = power
        return cls._raw(table, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, table: VarTable, exps: Sequence[int], coeff=1) -> "LaurentPoly":
        return cls(table, {tuple(exps): as_fraction(coeff)})

    # -- basic queries ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def is_constant(self) -> bool:
        z = (0,) * len(self.table)
        return all(e == z for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.terms.get((0,) * len(self.table), Fraction(0))

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def is_polynomial(self) -> bool:
        return all(x >= 0 for e in self.terms for x in e)

    def uses(self, name: str) -> bool:
        i = self.table.index(name)
        return any(e[i] for e in self.terms)

    def total_degree(self) -> float | int:
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def weighted_degrees(self, weights: Sequence[Fraction]) -> set[Fraction]:
        return {sum((w * x for w, x in zip(weights, e)), Fraction(0)) for e in self.terms}

    def degree(self, weights: Sequence[Fraction]):
        """Weighted degree if homogeneous; ``NEG_INF`` for zero."""
        if not self.terms:
            return NEG_INF
        degs = self.weighted_degrees(weights)
        if len(degs) != 1:
            raise ValueError(f"not weighted-homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def is_homogeneous(self, weights: Sequence[Fraction], degree=None) -> bool:
        if not self.terms:
            return True
        degs = self.weighted_degrees(weights)
        if len(degs) != 1:
            return False
        return degree is None or degs.pop() == degree

    def min_exponents(self) -> Exponent:
        if not self.terms:
            return (0,) * len(self.table)
        return tuple(min(col) for col in zip(*self.terms))

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.table != self.table:
                raise ValueError("polynomials over different variable tables")
            return other
        return LaurentPoly.constant(self.table, other)

    def __add__(self, other) -> "LaurentPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return LaurentPoly._raw(self.table, out)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._raw(self.table, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) - self

    def scale(self, c) -> "LaurentPoly":
        c = as_fraction(c)
        if not c:
            return LaurentPoly.zero(self.table)
        return LaurentPoly._raw(self.table, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other) -> "LaurentPoly":
        if not isinstance(other, LaurentPoly):
            return self.scale(other)
        other = self._coerce(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[Exponent, Fraction] = {}
        add = operator.add
        for e2, c2 in b.items():
            for e1, c1 in a.items():
                e = tuple(map(add, e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return LaurentPoly._raw(self.table, {e: c for e, c in out.items() if c})

    def __rmul__(self, other) -> "LaurentPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("negative power of a non-monomial")
            (e, c), = self.terms.items()
            return LaurentPoly._raw(self.table, {tuple(n * x for x in e): c**n})
        result = LaurentPoly.constant(self.table, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.table == other.table and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == LaurentPoly.constant(self.table, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.table.names, frozenset(self.terms.items())))

    def shift(self, exps: Sequence[int]) -> "LaurentPoly":
        """Multiply by the monomial with exponent vector ``exps``."""
        add = operator.add
        return LaurentPoly._raw(
            self.table, {tuple(map(add, e, exps)): c for e, c in self.terms.items()}
        )

    # -- calculus ---------------------------------------------------------
    def euler(self, name: str, factor=1) -> "LaurentPoly":
        """``factor * v d/dv`` for variable ``v``: multiplies each term by its exponent."""
        i = self.table.index(name)
        f = as_fraction(factor)
        return LaurentPoly._raw(
            self.table, {e: c * e[i] * f for e, c in self.terms.items() if e[i]}
        )

    def partial(self, name: str) -> "LaurentPoly":
        """Ordinary partial derivative in the variable ``name`` (markers untouched)."""
        i = self.table.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return LaurentPoly._raw(self.table, out)

    def diff(self, coord: str) -> "LaurentPoly":
        """Derivative with respect to a coordinate, acting on markers by the chain rule."""
        result: dict[Exponent, Fraction] = {}
        for i, f, is_euler in self.table.derivation(coord):
            for e, c in self.terms.items():
                k = e[i]
                if not k:
                    continue
                if is_euler:
                    ne = e
                    v = c * k * f
                else:
                    ne = e[:i] + (k - 1,) + e[i + 1:]
                    v = c * k
                old = result.get(ne)
                result[ne] = v if old is None else old + v
        return LaurentPoly._raw(self.table, {e: c for e, c in result.items() if c})

    def apply_field(self, field_: Mapping[str, "LaurentPoly | Fraction | int"]) -> "LaurentPoly":
        """Apply the vector field ``sum_c field[c] d/dc``."""
        out = LaurentPoly.zero(self.table)
        for coord, comp in field_.items():
            if isinstance(comp, LaurentPoly):
                if comp:
                    out = out + comp * self.diff(coord)
            elif comp:
                out = out + self.diff(coord).scale(comp)
        return out

    # -- substitution and evaluation ---------------------------------------
    def subs(self, mapping: Mapping[str, "LaurentPoly"], target: VarTable | None = None) -> "LaurentPoly":
        """Substitute variables; unmapped variables carry over by name into ``target``."""
        target = target or self.table
        used = [any(e[i] for e in self.terms) for i in range(len(self.table))]
        images = []
        for i, name in enumerate(self.table.names):
            if not used[i]:
                images.append(None)
            elif name in mapping:
                img = mapping[name]
                if img.table != target:
                    raise ValueError(f"image of {name} lives on another table")
                images.append(img)
            else:
                images.append(LaurentPoly.var(target, name))
        cache: dict[tuple[int, int], LaurentPoly] = {}

        def power(i: int, k: int) -> LaurentPoly:
            key = (i, k)
            if key not in cache:
                cache[key] = images[i] ** k
            return cache[key]

        out = LaurentPoly.zero(target)
        for e, c in self.terms.items():
            term = LaurentPoly.constant(target, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def rename(self, target: VarTable, names: Mapping[str, str] | None = None) -> "LaurentPoly":
        """Move to another table by (optionally renamed) variable names."""
        names = names or {}
        idx = []
        for n in self.table.names:
            idx.append(target.index(names.get(n, n)))
        out = {}
        size = len(target)
        for e, c in self.terms.items():
            ne = [0] * size
            for i, k in zip(idx, e):
                ne[i] += k
            ne = tuple(ne)
            out[ne] = out.get(ne, 0) + c
        return LaurentPoly(target, out)

    def evaluate(self, values):
        """Evaluate at numbers given as a mapping by name or a sequence in table order."""
        if isinstance(values, Mapping):
            vals = [values[n] for n in self.table.names]
        else:
            vals = list(values)
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def map_coefficients(self, f: Callable[[Fraction], Fraction]) -> "LaurentPoly":
        return LaurentPoly(self.table, {e: f(c) for e, c in self.terms.items()})

    # -- division ---------------------------------------------------------
    def leading(self) -> tuple[Exponent, Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient; raises :class:`NotDivisible` on a nonzero remainder."""
        other = self._coerce(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if len(other.terms) == 1:
            (e0, c0), = other.terms.items()
            neg = tuple(-x for x in e0)
            return self.shift(neg).scale(1 / c0)
        # Strip the monomial content of both sides.  The divisor then has
        # valuation zero in every variable, so any exact quotient of the
        # stripped numerator is an honest polynomial and graded-lex division
        # finds it.
        lo_n, lo_d = self.min_exponents(), other.min_exponents()
        num = self.shift(tuple(-x for x in lo_n))
        den = other.shift(tuple(-x for x in lo_d))
        offset = tuple(a - b for a, b in zip(lo_n, lo_d))
        lt_e, lt_c = den.leading()
        quot: dict[Exponent, Fraction] = {}
        rem = num
        guard = 0
        while rem.terms:
            guard += 1
            if guard > 10**6:
                raise NonTerminating("exact division does not terminate")
            e, c = rem.leading()
            qe = tuple(a - b for a, b in zip(e, lt_e))
            if any(x < 0 for x in qe):
                raise NotDivisible(f"{self} is not divisible by {other}")
            qc = c / lt_c
            quot[qe] = quot.get(qe, 0) + qc
            rem = rem - den.shift(qe).scale(qc)
        return LaurentPoly(self.table, quot).shift(offset)

    # -- rendering --------------------------------------------------------
    def sorted_terms(self, weights: Sequence[Fraction] | None = None) -> list[tuple[Exponent, Fraction]]:
        def key(item):
            e = item[0]
            if weights is not None:
                deg = sum((w * x for w, x in zip(weights, e)), Fraction(0))
            else:
                deg = Fraction(sum(e))
            return (deg, sum(e), e)

        return sorted(self.terms.items(), key=key, reverse=True)

    def render(self, weights: Sequence[Fraction] | None = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms(weights):
            factors = []
            for name, k in zip(self.table.names, e):
                if k == 1:
                    factors.append(name)
                elif k:
                    factors.append(f"{name}^{k}")
            mono = "*".join(factors)
            if not mono:
                s = render_fraction(c)
            elif c == 1:
                s = mono
            elif c == -1:
                s = "-" + mono
            else:
                s = f"{render_fraction(c)}*{mono}"
            parts.append(s)
        out = parts[0]
        for s in parts[1:]:
            out += " - " + s[1:] if s.startswith("-") else " + " + s
        return out

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"LaurentPoly({self.render()!r})"


def grlex_key(e: Exponent):
    return (sum(e), e)


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+(?:\^-?\d+[^+-]*)*)")
_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")
_COEF_RE = re.compile(r"^\d+(?:/\d+)?$")


def parse_poly(text: str, table: VarTable) -> LaurentPoly:
    """Parse the canonical rendering (``-1/2*y1^2 + 2*y2``) back into a polynomial."""
    s = text.strip()
    if not s:
        raise ValueError("empty polynomial text")
    tokens: list[tuple[int, str]] = []
    sign = 1
    buf = ""
    i = 0
    # split on +/- that are not part of a negative exponent
    while i < len(s):
        ch = s[i]
        if ch in "+-" and not (buf.rstrip().endswith("^")):
            if buf.strip():
                tokens.append((sign, buf.strip()))
            elif buf.strip() == "" and tokens == [] and ch == "-" and sign == -1:
                raise ValueError(f"malformed polynomial {text!r}")
            sign = -1 if ch == "-" else 1
            buf = ""
        else:
            buf += ch
        i += 1
    if buf.strip():
        tokens.append((sign, buf.strip()))
    out = LaurentPoly.zero(table)
    for sgn, term in tokens:
        coef = Fraction(sgn)
        exps = [0] * len(table)
        for factor in (f.strip() for f in term.split("*")):
            if _COEF_RE.match(factor):
                coef *= Fraction(factor)
                continue
            m = _FACTOR_RE.match(factor)
            if not m:
                raise ValueError(f"cannot parse factor {factor!r} in {text!r}")
            exps[table.index(m.group(1))] += int(m.group(2) or 1)
        out = out + LaurentPoly.monomial(table, exps, coef)
    return out


# ---------------------------------------------------------------------------
# polynomial matrices
# ---------------------------------------------------------------------------

class PolyMatrix:
    """Rectangular matrix of :class:`LaurentPoly` sharing one table."""

    def __init__(self, rows: Sequence[Sequence[LaurentPoly]]):
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("PolyMatrix must be rectangular and nonempty")
        table = rows[0][0].table
        if any(p.table != table for r in rows for p in r):
            raise ValueError("entries on different tables")
        self.rows = rows
        self.table = table

    @classmethod
    def from_fn(cls, n: int, m: int, fn: Callable[[int, int], LaurentPoly]) -> "PolyMatrix":
        return cls([[fn(i, j) for j in range(m)] for i in range(n)])

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def map(self, f: Callable[[LaurentPoly], LaurentPoly]) -> "PolyMatrix":
        return PolyMatrix([[f(p) for p in r] for r in self.rows])

    def transform(self, jac: Sequence[Sequence[Fraction]]) -> "PolyMatrix":
        """Contravariant transform ``J M J^T`` by a constant matrix."""
        n, m = self.shape
        table = self.table
        mid = [[sum((self.rows[a][b].scale(jac[j][b]) for b in range(m) if jac[j][b]),
                    LaurentPoly.zero(table)) for j in range(len(jac))] for a in range(n)]
        return PolyMatrix([[sum((mid[a][j].scale(jac[i][a]) for a in range(n) if jac[i][a]),
                                LaurentPoly.zero(table)) for j in range(len(jac))]
                           for i in range(len(jac))])

    def is_symmetric(self) -> bool:
        n, m = self.shape
        return n == m and all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    def render(self, weights=None) -> list[list[str]]:
        return [[p.render(weights) for p in r] for r in self.rows]

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMatrix) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"PolyMatrix({self.render()})"


def determinant(m: PolyMatrix) -> LaurentPoly:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n, k = m.shape
    if n != k:
        raise ValueError("determinant of a non-square matrix")
    a = [list(r) for r in m.rows]
    table = m.table
    sign = 1
    prev = LaurentPoly.constant(table, 1)
    for c in range(n - 1):
        piv = _pick_pivot(a, c, c)
        if piv is None:
            return LaurentPoly.zero(table)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[c][c] - a[i][c] * a[c][j]).exact_div(prev)
            a[i][c] = LaurentPoly.zero(table)
        prev = a[c][c]
    return a[n - 1][n - 1] * sign


def _pick_pivot(a, col: int, start: int) -> int | None:
    best = None
    for i in range(start, len(a)):
        p = a[i][col]
        if p:
            # prefer constant pivots, then short ones
            score = (0 if p.is_constant() else 1, len(p))
            if best is None or score < best[0]:
                best = (score, i)
    return None if best is None else best[1]


# ---------------------------------------------------------------------------
# linear solving
# ---------------------------------------------------------------------------

@dataclass
class RationalSolution:
    """Solution of ``A X = B`` over the rationals.

    ``values`` has one row per unknown and one column per right-hand side
    (free variables set to zero); ``kernel`` spans the null space of ``A``.
    """

    values: list[list[Fraction]]
    rank: int
    kernel: list[list[Fraction]]
    pivots: list[int]


def solve_rational(a: Sequence[Sequence], b: Sequence[Sequence] | None = None,
                   *, require_unique: bool = False) -> RationalSolution:
    """Gauss-Jordan elimination over ``Fraction`` with many right-hand sides.

    Overdetermined systems are checked for consistency exactly.
    """
    rows = len(a)
    cols = len(a[0]) if rows else 0
    nrhs = len(b[0]) if b is not None and rows else 0
    m = [[Fraction(x) for x in a[i]] + ([Fraction(x) for x in b[i]] if b is not None else [])
         for i in range(rows)]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        pr = [x * inv for x in m[r]]
        m[r] = pr
        nz = [j for j in range(c, cols + nrhs) if pr[j]]
        for i in range(rows):
            if i != r:
                f = m[i][c]
                if f:
                    row = m[i]
                    for j in nz:
                        row[j] -= f * pr[j]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    rank = r
    for i in range(rank, rows):
        for j in range(cols, cols + nrhs):
            if m[i][j]:
                raise Inconsistent(f"inconsistent system at row {i}, rhs {j - cols}", (i, j - cols))
    free = [c for c in range(cols) if c not in pivots]
    if require_unique and free:
        raise Singular(f"rank {rank} < {cols} unknowns", (rank, free[0]))
    values = [[Fraction(0)] * nrhs for _ in range(cols)]
    for i, c in enumerate(pivots):
        for j in range(nrhs):
            values[c][j] = m[i][cols + j]
    kernel = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -m[i][f]
        kernel.append(v)
    return RationalSolution(values, rank, kernel, pivots)


@dataclass
class PolySolution:
    """``x_i = numerators[i] / denominator`` over the polynomial fraction field."""

    numerators: list[LaurentPoly]
    denominator: LaurentPoly
    rank: int

    def as_polynomials(self) -> list[LaurentPoly]:
        return [n.exact_div(self.denominator) for n in self.numerators]


def solve_linear(a, b):
    """Exact solve of ``A x = b``.

    Rational entries go through Gauss-Jordan (:func:`solve_rational`);
    polynomial entries through fraction-free Bareiss elimination followed by
    fraction-free back substitution, returning a common denominator.
    """
    if isinstance(a, PolyMatrix) or (a and isinstance(a[0][0], LaurentPoly)):
        return _solve_bareiss(a if isinstance(a, PolyMatrix) else PolyMatrix(a), list(b))
    sol = solve_rational(a, [[x] for x in b], require_unique=True)
    return [row[0] for row in sol.values]


def _solve_bareiss(a: PolyMatrix, b: list[LaurentPoly]) -> PolySolution:
    n, k = a.shape
    table = a.table
    m = [list(a.rows[i]) + [b[i] if isinstance(b[i], LaurentPoly) else LaurentPoly.constant(table, b[i])]
         for i in range(n)]
    prev = LaurentPoly.constant(table, 1)
    prow = 0
    piv_cols = []
    for c in range(k):
        p = _pick_pivot(m, c, prow)
        if p is None:
            continue
        m[prow], m[p] = m[p], m[prow]
        for i in range(prow + 1, n):
            for j in range(c + 1, k + 1):
                m[i][j] = (m[i][j] * m[prow][c] - m[i][c] * m[prow][j]).exact_div(prev)
            m[i][c] = LaurentPoly.zero(table)
        prev = m[prow][c]
        piv_cols.append(c)
        prow += 1
        if prow == n:
            break
    rank = prow
    for i in range(rank, n):
        if m[i][k]:
            raise Inconsistent(f"inconsistent polynomial system at row {i}", (i, k))
    if rank < k:
        raise Singular(f"rank {rank} < {k} unknowns", (rank, rank))
    den = m[rank - 1][piv_cols[-1]]
    nums = [LaurentPoly.zero(table)] * k
    for i in range(rank - 1, -1, -1):
        c = piv_cols[i]
        acc = m[i][k] * den
        for j in range(c + 1, k):
            if m[i][j]:
                acc = acc - m[i][j] * nums[j]
        nums[c] = acc.exact_div(m[i][c])
    return PolySolution(nums, den, rank)


# ---------------------------------------------------------------------------
# weighted monomial enumeration
# ---------------------------------------------------------------------------

def weighted_basis(weights: Sequence[Fraction | None], target,
                   bounds: Sequence[int | None] | None = None) -> list[Exponent]:
    """All nonnegative exponent vectors of weighted degree ``target``.

    ``weights[i] is None`` excludes variable ``i``.  A zero weight without an
    exponent bound makes the basis infinite and is rejected.  Output is in
    descending graded-lex order.
    """
    target = as_fraction(target)
    n = len(weights)
    bounds = list(bounds) if bounds is not None else [None] * n
    for i, w in enumerate(weights):
        if w is None:
            continue
        w = as_fraction(w)
        if w < 0:
            raise InfiniteBasis(f"variable {i} has negative weight {w}")
        if w == 0 and bounds[i] is None:
            raise InfiniteBasis(f"variable {i} has weight 0 and no exponent bound")
    if target < 0:
        return []
    out: list[Exponent] = []
    cur = [0] * n

    def rec(i: int, remaining: Fraction):
        if i == n:
            if remaining == 0:
                out.append(tuple(cur))
            return
        w = weights[i]
        if w is None:
            rec(i + 1, remaining)
            return
        w = as_fraction(w)
        top = bounds[i] if w == 0 else int(remaining / w)
        if bounds[i] is not None:
            top = min(top, bounds[i])
        for k in range(top + 1):
            cur[i] = k
            rec(i + 1, remaining - k * w)
        cur[i] = 0

    rec(0, target)
    out.sort(key=grlex_key, reverse=True)
    return out


# ---------------------------------------------------------------------------
# symmetric reduction
# ---------------------------------------------------------------------------

def q_table(n: int) -> VarTable:
    return VarTable(tuple(f"q{i}" for i in range(1, n + 1)))


def sigma_table(n: int) -> VarTable:
    return VarTable(tuple(f"s{i}" for i in range(1, n + 1)))


def elementary(table: VarTable, j: int) -> LaurentPoly:
    n = len(table)
    terms = {}
    for idx in combinations(range(n), j):
        e = [0] * n
        for i in idx:
            e[i] = 1
        terms[tuple(e)] = Fraction(1)
    return LaurentPoly(table, terms)


def check_symmetric(p: LaurentPoly) -> None:
    n = len(p.table)
    for i in range(n - 1):
        swapped = {e[:i] + (e[i + 1], e[i]) + e[i + 2:]: c for e, c in p.terms.items()}
        if swapped != p.terms:
            raise NotSymmetric(f"not invariant under swapping variables {i + 1} and {i + 2}")


class _ElementaryCache:
    """Products of elementary symmetric polynomials, restricted to sorted exponents."""

    def __init__(self, n: int):
        self.n = n
        self.table = q_table(n)
        self.elem = [None] + [elementary(self.table, j) for j in range(1, n + 1)]
        self.full: dict[Exponent, LaurentPoly] = {(0,) * n: LaurentPoly.constant(self.table, 1)}
        self.dominant: dict[Exponent, dict[Exponent, Fraction]] = {}

    def product(self, mu: Exponent) -> LaurentPoly:
        if mu in self.full:
            return self.full[mu]
        j = max(i for i, x in enumerate(mu) if x)
        smaller = list(mu)
        smaller[j] -= 1
        p = self.product(tuple(smaller)) * self.elem[j + 1]
        self.full[mu] = p
        return p

    def dominant_terms(self, mu: Exponent) -> dict[Exponent, Fraction]:
        if mu not in self.dominant:
            self.dominant[mu] = {e: c for e, c in self.product(mu).terms.items()
                                 if all(e[i] >= e[i + 1] for i in range(self.n - 1))}
        return self.dominant[mu]


_CACHES: dict[int, _ElementaryCache] = {}


def sym_reduce_full(p: LaurentPoly) -> tuple[LaurentPoly, int]:
    """Rewrite a symmetric Laurent polynomial in ``s1..sn``.

    Returns ``(P, N)`` with ``p = P(s) / s_n^N``, ``N >= 0`` the power of the
    product of all variables used to clear negative exponents.
    """
    check_symmetric(p)
    n = len(p.table)
    cache = _CACHES.setdefault(n, _ElementaryCache(n))
    shift = max(0, -min(p.min_exponents(), default=0))
    work = {e: c for e, c in p.shift((shift,) * n).terms.items()
            if all(e[i] >= e[i + 1] for i in range(n - 1))}
    stable = sigma_table(n)
    result: dict[Exponent, Fraction] = {}
    deg = max((sum(e) for e in work), default=0)
    guard = math.comb(deg + n, n) + 1
    steps = 0
    while work:
        steps += 1
        if steps > guard:
            raise NonTerminating("symmetric reduction exceeded its step bound")
        lead = max(work, key=grlex_key)
        c = work[lead]
        mu = tuple(lead[i] - lead[i + 1] for i in range(n - 1)) + (lead[n - 1],)
        result[mu] = result.get(mu, 0) + c
        for e, v in cache.dominant_terms(mu).items():
            nv = work.get(e, 0) - c * v
            if nv:
                work[e] = nv
            else:
                work.pop(e, None)
        if work.get(lead):
            raise NonTerminating("leading term survived elimination")
    return LaurentPoly(stable, result), shift


def sym_reduce(p: LaurentPoly, l: int) -> LaurentPoly:
    """Symmetric polynomial in ``q1..q_{l+1}`` as a polynomial in ``s1..sl``, with ``s_{l+1} = 1``."""
    if len(p.table) != l + 1:
        raise ValueError(f"expected {l + 1} variables, got {len(p.table)}")
    full, _ = sym_reduce_full(p)
    target = sigma_table(l)
    out: dict[Exponent, Fraction] = {}
    for e, c in full.terms.items():
        out[e[:l]] = out.get(e[:l], 0) + c
    return LaurentPoly(target, out)


def substitute_elementary(p: LaurentPoly, table: VarTable) -> LaurentPoly:
    """Inverse of :func:`sym_reduce`: replace ``s_j`` by ``e_j(q)``."""
    mapping = {f"s{j}": elementary(table, j) for j in range(1, len(p.table) + 1)}
    return p.subs(mapping, table)


# ---------------------------------------------------------------------------
# fast numeric evaluation
# ---------------------------------------------------------------------------

class NumericPolys:
    """Vectorised complex evaluation of many polynomials on one table."""

    def __init__(self, polys: Sequence[LaurentPoly]):
        if not polys:
            raise ValueError("nothing to compile")
        self.table = polys[0].table
        exps, coefs, owner = [], [], []
        for k, p in enumerate(polys):
            for e, c in p.terms.items():
                exps.append(e)
                coefs.append(complex(c))
                owner.append(k)
        self.count = len(polys)
        self.exps = np.array(exps, dtype=np.int64).reshape(-1, len(self.table))
        mat = np.zeros((len(exps), len(polys)), dtype=complex)
        mat[np.arange(len(exps)), owner] = coefs
        self.coef_matrix = mat

    def __call__(self, values: np.ndarray) -> np.ndarray:
        """``values`` has shape ``(..., nvars)``; result ``(..., npolys)``."""
        v = np.asarray(values, dtype=complex)
        mono = np.prod(v[..., None, :] ** self.exps, axis=-1)
        return mono @ self.coef_matrix


def iter_nonzero(rows: Iterable[Sequence]) -> Iterator[tuple[int, int, object]]:
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if x:
                yield i, j, x


def lcm_denominator(values: Iterable[Fraction]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), (Fraction(v).denominator for v in values), 1)


# ---------------------------------------------------------------------------
# modular linear algebra
# ---------------------------------------------------------------------------

PRIME = 2**127 - 1


def to_mod(c, p: int = PRIME) -> int:
    c = Fraction(c)
    return c.numerator % p * pow(c.denominator, -1, p) % p


def rational_reconstruct(a: int, p: int = PRIME) -> Fraction:
    """Smallest-height fraction ``n/d`` with ``n = a d (mod p)``; raises ValueError if none."""
    a %= p
    bound = math.isqrt(p // 2)
    r0, r1 = p, a
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        raise ValueError(f"no rational reconstruction for residue {a}")
    return Fraction(r1, s1)


def solve_mod(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], p: int = PRIME) -> list[list[int]]:
    """Solve ``A X = B`` modulo a prime for overdetermined consistent systems.

    Raises :class:`Singular` if the columns are dependent and
    :class:`Inconsistent` if a surplus row disagrees.
    """
    rows = len(a)
    cols = len(a[0])
    nrhs = len(b[0])
    m = [[x % p for x in a[i]] + [x % p for x in b[i]] for i in range(rows)]
    width = cols + nrhs
    for c in range(cols):
        piv = next((i for i in range(c, rows) if m[i][c]), None)
        if piv is None:
            raise Singular(f"no pivot in column {c}", (c, c))
        m[c], m[piv] = m[piv], m[c]
        inv = pow(m[c][c], -1, p)
        pr = [x * inv % p for x in m[c]]
        m[c] = pr
        for i in range(rows):
            if i != c:
                f = m[i][c]
                if f:
                    row = m[i]
                    for j in range(c, width):
                        if pr[j]:
                            row[j] = (row[j] - f * pr[j]) % p
    for i in range(cols, rows):
        for j in range(cols, width):
            if m[i][j]:
                raise Inconsistent(f"surplus row {i} disagrees in rhs {j - cols}", (i, j - cols))
    return [[m[i][cols + j] for j in range(nrhs)] for i in range(cols)]
