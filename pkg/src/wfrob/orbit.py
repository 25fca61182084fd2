"""Orbit-space data for the extended affine Weyl group of type A.

Coordinates: ``x_1..x_l`` on the Cartan subalgebra (coroot basis), two extra
coordinates ``x_{l+1}, x_{l+2}``.  The invariant generators are
``ytilde_j = exp(2 pi i (d_{j,k} x_{l+1} + d_{j,k+1} x_{l+2})) * sigma_j(q)``
with ``q_s = exp(2 pi i v_s)`` and ``sigma_j`` elementary symmetric, plus the
two pure exponentials.

All ``2 pi i`` factors are absorbed by working with ``D_a = (1/2 pi i) d/dx_a``,
which act on ``q``-monomials by integers.  The metric on x-space then becomes
the rational matrix ``blockdiag(-d_ab, tau)`` in this normalisation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .algebra import (
    AlgebraError,
    LaurentPoly,
    PolyMatrix,
    VarTable,
    PRIME,
    determinant,
    q_table,
    rational_reconstruct,
    solve_mod,
    solve_rational,
    sym_reduce,
    to_mod,
    weighted_basis,
)


class InvalidSpec(ValueError):
    pass


class SymReduceFailure(AlgebraError):
    pass


class NonPolynomialResult(AlgebraError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    l: int
    k: int

    def __post_init__(self):
        if not isinstance(self.l, int) or not isinstance(self.k, int):
            raise InvalidSpec("l and k must be integers")
        if self.l < 2:
            raise InvalidSpec(f"need l >= 2, got l={self.l}")
        if not 1 <= self.k < self.l:
            raise InvalidSpec(f"need 1 <= k < l, got l={self.l}, k={self.k}")

    @property
    def m(self) -> int:
        return self.l - self.k

    @property
    def n(self) -> int:
        """Dimension of the orbit space."""
        return self.l + 2

    def __str__(self) -> str:
        return f"A{self.l},k={self.k}"

    @cached_property
    def roots(self) -> "RootData":
        return build_root_data(self)

    @cached_property
    def degree_data(self) -> "DegreeData":
        return degrees(self)

    @property
    def tau(self) -> list[list[Fraction]]:
        l, k = self.l, self.k
        return [[Fraction(k + 1, k), Fraction(-1)], [Fraction(-1), Fraction(l - k + 1, l - k)]]


@dataclass(frozen=True)
class RootData:
    simple_roots: tuple[tuple[Fraction, ...], ...]
    fundamental_weights: tuple[tuple[Fraction, ...], ...]
    pairing: tuple[tuple[Fraction, ...], ...]

    def d(self, a: int, b: int) -> Fraction:
        """``(omega_a, omega_b)`` with 1-based indices."""
        return self.pairing[a - 1][b - 1]


def _dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def build_root_data(spec: GroupSpec) -> RootData:
    l = spec.l
    n = l + 1
    roots = []
    weights = []
    for j in range(1, l + 1):
        a = [Fraction(0)] * n
        a[j - 1], a[j] = Fraction(1), Fraction(-1)
        roots.append(tuple(a))
        w = [Fraction(1 if s < j else 0) - Fraction(j, n) for s in range(n)]
        weights.append(tuple(w))
    pairing = tuple(tuple(_dot(u, v) for v in weights) for u in weights)
    return RootData(tuple(roots), tuple(weights), pairing)


@dataclass(frozen=True)
class DegreeData:
    """``d[j]`` for ``j = 1..l+2`` (index 0 unused) and the duality ``j -> j*``."""

    d: tuple[Fraction, ...]
    dual: tuple[int, ...]

    def __getitem__(self, j: int) -> Fraction:
        return self.d[j]

    @property
    def flat_dual(self) -> tuple[int, ...]:
        """Involution paired by the flat metric in z/t charts: ``k <-> l+2``, ``k+1 <-> l+1``."""
        dual = list(self.dual)
        n = len(dual) - 1
        k = dual[n - 1]
        dual[k], dual[k + 1], dual[n - 1], dual[n] = n, n - 1, k + 1, k
        return tuple(dual)


def degrees(spec: GroupSpec) -> DegreeData:
    l, k = spec.l, spec.k
    d = [Fraction(0)]
    for j in range(1, l + 1):
        d.append(Fraction(j, k) if j <= k else Fraction(l - j + 1, l - k))
    d += [Fraction(0), Fraction(0)]
    dual = [0] * (l + 3)
    for j in range(1, k):
        dual[j] = k - j
    for j in range(k + 2, l + 1):
        dual[j] = l + k + 2 - j
    dual[k], dual[k + 1], dual[l + 1], dual[l + 2] = l + 1, l + 2, k, k + 1
    return DegreeData(tuple(d), tuple(dual))


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

def chart_table(spec: GroupSpec, chart: str) -> VarTable:
    """Variable table of a chart: ``<c>1..<c>{l+2}`` plus markers ``E1, E2``.

    y-chart: ``E1 = exp(y{l+1})``, ``E2 = exp(y{l+2})``.
    z- and t-charts: ``E1 = exp(c{l+1})``, ``E2 = exp(c{l+2} - c{l+1})``.
    """
    if chart not in ("y", "z", "t"):
        raise ValueError(f"unknown chart {chart!r}")
    l = spec.l
    names = tuple(f"{chart}{i}" for i in range(1, l + 3)) + ("E1", "E2")
    a, b = f"{chart}{l + 1}", f"{chart}{l + 2}"
    if chart == "y":
        markers = (("E1", ((a, Fraction(1)),)), ("E2", ((b, Fraction(1)),)))
    else:
        markers = (("E1", ((a, Fraction(1)),)), ("E2", ((b, Fraction(1)), (a, Fraction(-1)))))
    return VarTable(names, markers)


def chart_weights(spec: GroupSpec, chart: str) -> list[Fraction]:
    """Grading of a chart's variables (bare log coordinates get weight 0)."""
    dd = spec.degree_data
    w = [dd[j] for j in range(1, spec.l + 1)] + [Fraction(0), Fraction(0)]
    if chart == "y":
        w += [Fraction(1, spec.k), Fraction(1, spec.m)]
    else:
        w += [Fraction(1, spec.m), Fraction(1, spec.k)]
    return w


def coord(spec: GroupSpec, chart: str, i: int) -> str:
    return f"{chart}{i}"


@dataclass(frozen=True)
class ChartTensor:
    """Matrix or 3-tensor of polynomials tagged by its chart.

    For 3-tensors ``entries[m][i][j]`` holds the component with lower index ``m``.
    """

    chart: str
    table: VarTable
    entries: tuple

    @property
    def rank(self) -> int:
        return 3 if isinstance(self.entries[0][0], tuple) else 2

    def __getitem__(self, idx):
        e = self.entries
        for i in idx:
            e = e[i]
        return e

    def matrix(self) -> PolyMatrix:
        return PolyMatrix(self.entries)

    def map(self, f) -> "ChartTensor":
        return ChartTensor(self.chart, self.table, _map_nested(self.entries, f))

    def render(self, weights=None):
        return _map_nested(self.entries, lambda p: p.render(weights))


def _map_nested(e, f):
    if isinstance(e, LaurentPoly):
        return f(e)
    return tuple(_map_nested(x, f) for x in e)


def as_tuple_matrix(rows) -> tuple:
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------
# metric in the y-chart
# ---------------------------------------------------------------------------

def _subset_exponents(n: int, j: int) -> list[tuple[int, ...]]:
    out = []
    for idx in combinations(range(n), j):
        e = [0] * n
        for i in idx:
            e[i] = 1
        out.append(tuple(e))
    return out


def _log_weights(e: Sequence[int], l: int) -> list[int]:
    """Eigenvalues of ``D_1..D_l`` on the monomial ``q^e``."""
    return [e[a] - e[a + 1] for a in range(l)]


def _ext_vector(spec: GroupSpec, j: int) -> tuple[Fraction, Fraction]:
    """Eigenvalues of ``D_{l+1}, D_{l+2}`` on the prefactor of ``ytilde_j``."""
    r = spec.roots
    return r.d(j, spec.k), r.d(j, spec.k + 1)


def _tau_form(spec: GroupSpec, u, v) -> Fraction:
    t = spec.tau
    return sum((t[a][b] * u[a] * v[b] for a in range(2) for b in range(2)), Fraction(0))


def _to_y_chart(spec: GroupSpec, reduced: LaurentPoly, prefactor: tuple[Fraction, Fraction],
                table: VarTable, what: str) -> LaurentPoly:
    """Rewrite ``exp(2 pi i (p1 x_{l+1} + p2 x_{l+2})) * P(sigma)`` in y-chart variables.

    Each sigma-monomial is traded for y's, leaving an exponential that must be
    an integral, nonnegative power of ``E1, E2``.
    """
    l = spec.l
    out = {}
    ext = [_ext_vector(spec, j) for j in range(1, l + 1)]
    for p, c in reduced.terms.items():
        n1 = prefactor[0] - sum((p[s] * ext[s][0] for s in range(l)), Fraction(0))
        n2 = prefactor[1] - sum((p[s] * ext[s][1] for s in range(l)), Fraction(0))
        if n1.denominator != 1 or n2.denominator != 1:
            raise SymReduceFailure(f"{what}: non-integral exponential power ({n1}, {n2})")
        if n1 < 0 or n2 < 0:
            raise SymReduceFailure(f"{what}: negative exponential power ({n1}, {n2})")
        e = tuple(p) + (0, 0, int(n1), int(n2))
        out[e] = c
    return LaurentPoly(table, out)


def metric_g_y(spec: GroupSpec) -> ChartTensor:
    """Intersection form ``g^{ij}(y)`` as an exact symmetric matrix."""
    l = spec.l
    n = l + 1
    table = chart_table(spec, "y")
    qt = q_table(n)
    dmat = spec.roots.pairing
    sig = {j: _subset_exponents(n, j) for j in range(1, l + 1)}
    rows = [[LaurentPoly.zero(table) for _ in range(l + 2)] for _ in range(l + 2)]
    for i in range(1, l + 1):
        for j in range(i, l + 1):
            # Euclidean part, sum_{a,b<=l} -d_ab D_a sigma_i D_b sigma_j
            acc: dict = {}
            for e in sig[i]:
                ue = _log_weights(e, l)
                du = [sum((dmat[a][b] * ue[a] for a in range(l)), Fraction(0)) for b in range(l)]
                for f in sig[j]:
                    uf = _log_weights(f, l)
                    c = -sum((du[b] * uf[b] for b in range(l)), Fraction(0))
                    if c:
                        key = tuple(x + y for x, y in zip(e, f))
                        acc[key] = acc.get(key, 0) + c
            sym = sym_reduce(LaurentPoly(qt, acc), l)
            ei, ej = _ext_vector(spec, i), _ext_vector(spec, j)
            pref = (ei[0] + ej[0], ei[1] + ej[1])
            try:
                entry = _to_y_chart(spec, sym, pref, table, f"g^{i}{j}")
            except AlgebraError as exc:
                raise SymReduceFailure(str(exc)) from exc
            # extended part: tau(D_ext y^i, D_ext y^j) = c_ij y^i y^j
            cij = _tau_form(spec, ei, ej)
            entry = entry + (LaurentPoly.var(table, f"y{i}") * LaurentPoly.var(table, f"y{j}")).scale(cij)
            rows[i - 1][j - 1] = rows[j - 1][i - 1] = entry
        ei = _ext_vector(spec, i)
        t = spec.tau
        for nu in range(2):
            c = t[nu][0] * ei[0] + t[nu][1] * ei[1]
            rows[i - 1][l + nu] = rows[l + nu][i - 1] = LaurentPoly.var(table, f"y{i}").scale(c)
    for a in range(2):
        for b in range(2):
            rows[l + a][l + b] = LaurentPoly.constant(table, spec.tau[a][b])
    return ChartTensor("y", table, as_tuple_matrix(rows))


def unity_field(spec: GroupSpec, chart: str = "y") -> dict[str, Fraction]:
    """``e`` as components: ``d/dy^k + d/dy^{k+1}`` in y, ``d/dz^k`` in z and t."""
    k = spec.k
    if chart == "y":
        return {f"y{k}": Fraction(1), f"y{k + 1}": Fraction(1)}
    return {f"{chart}{k}": Fraction(1)}


def lie_e(spec: GroupSpec, p: LaurentPoly, chart: str = "y") -> LaurentPoly:
    """Lie derivative of a function along the unity field.

    Since ``e`` has constant components, this is also the Lie derivative of
    every tensor component in the chart.
    """
    return p.apply_field(unity_field(spec, chart))


def eta_y(spec: GroupSpec, g: ChartTensor) -> ChartTensor:
    return g.map(lambda p: lie_e(spec, p, g.chart))


def is_homogeneous_tensor(t: ChartTensor, weights, degree_fn) -> list[tuple]:
    """Indices of entries failing ``degree_fn(indices)``-homogeneity."""
    bad = []

    def walk(e, idx):
        if isinstance(e, LaurentPoly):
            if not e.is_homogeneous(weights, degree_fn(*idx)):
                bad.append(idx)
            return
        for i, x in enumerate(e):
            walk(x, idx + (i,))

    walk(t.entries, ())
    return bad


# ---------------------------------------------------------------------------
# Christoffel symbols
# ---------------------------------------------------------------------------

class _FourierPoint:
    """Values of the generators and their D-derivatives at a point of the torus, mod a prime.

    The point is given by ``X_a = exp(2 pi i x_a)`` and ``P = exp(2 pi i x_{l+1}/(l+1))``,
    ``Q = exp(2 pi i x_{l+2}/(l+1))``; every generator is then a Laurent
    polynomial in ``X, P, Q`` and can be evaluated in a prime field.
    """

    def __init__(self, spec: GroupSpec, xs: Sequence[int], p: int, q: int, prime: int = PRIME):
        l = spec.l
        n = l + 1
        self.spec = spec
        inv = lambda a: pow(a, -1, prime)
        qv = [xs[0] % prime] + [xs[s] * inv(xs[s - 1]) % prime for s in range(1, l)] + [inv(xs[l - 1])]
        self.E = (pow(p, n, prime), pow(q, n, prime))
        nn = l + 2
        # y values, first derivatives J[r][m] = D_r y^m, second H[m][a][b] = D_a D_b y^m
        self.y = [0] * nn
        self.J = [[0] * nn for _ in range(nn)]
        self.H = [[[0] * nn for _ in range(nn)] for _ in range(nn)]
        for j in range(1, l + 1):
            ext = _ext_vector(spec, j)
            pref = pow(p, int(ext[0] * n), prime) * pow(q, int(ext[1] * n), prime) % prime
            extm = [to_mod(ext[0], prime), to_mod(ext[1], prime)]
            val = 0
            d1 = [0] * nn
            d2 = [[0] * nn for _ in range(nn)]
            for e in _subset_exponents(n, j):
                mono = 1
                for s, x in enumerate(e):
                    if x:
                        mono = mono * qv[s] % prime
                u = _log_weights(e, l) + extm
                val += mono
                for a in range(nn):
                    if u[a]:
                        t = u[a] * mono
                        d1[a] += t
                        for b in range(nn):
                            if u[b]:
                                d2[a][b] += u[b] * t
            m = j - 1
            self.y[m] = pref * val % prime
            for a in range(nn):
                self.J[a][m] = pref * d1[a] % prime
                for b in range(nn):
                    self.H[m][a][b] = pref * d2[a][b] % prime
        # log coordinates: y^{l+1} = 2 pi i x_{l+1}
        self.J[l][l] = 1
        self.J[l + 1][l + 1] = 1

    def monomial_values(self) -> list[int]:
        """Values of the y-chart table variables (log coordinates set to 0, unused)."""
        l = self.spec.l
        return self.y[:l] + [0, 0] + list(self.E)


def x_metric(spec: GroupSpec) -> list[list[Fraction]]:
    """``blockdiag(-d_ab, tau)``: the x-space metric in the D-normalisation."""
    l = spec.l
    nn = l + 2
    G = [[Fraction(0)] * nn for _ in range(nn)]
    for a in range(l):
        for b in range(l):
            G[a][b] = -spec.roots.pairing[a][b]
    for a in range(2):
        for b in range(2):
            G[l + a][l + b] = spec.tau[a][b]
    return G


def _christoffel_values(spec: GroupSpec, pt: _FourierPoint, Gm, prime: int = PRIME) -> dict:
    """Solve ``sum_m Gamma_m^{ij} D_r y^m = sum_ab G_ab D_a y^i D_b D_r y^j`` at a point."""
    nn = spec.l + 2
    J = pt.J
    A = [[sum(Gm[a][b] * J[a][i] for a in range(nn)) % prime for b in range(nn)] for i in range(nn)]
    keys = [(i, j) for i in range(nn) for j in range(nn)]
    rhs = [[sum(A[i][b] * pt.H[j][b][r] for b in range(nn)) % prime for (i, j) in keys]
           for r in range(nn)]
    sol = solve_mod(J, rhs, prime)
    return {(m, i, j): sol[m][c] for c, (i, j) in enumerate(keys) for m in range(nn)}


def christoffel_y(spec: GroupSpec, g: ChartTensor | None = None, *, seed: int = 0,
                  certify: bool = True) -> ChartTensor:
    """Contravariant Christoffel symbols ``Gamma_m^{ij}(y)`` of the intersection form.

    The defining identity (a linear system with the Jacobian ``D_r y^m``) is
    solved at random points of the torus in a large prime field; each entry is
    interpolated on the finite monomial space of its weighted degree, surplus
    points check the interpolant, and coefficients are lifted to rationals.
    The lifted result is then certified symbolically against the metric, so
    a wrong lift cannot go unnoticed.
    """
    l = spec.l
    nn = l + 2
    table = chart_table(spec, "y")
    weights = chart_weights(spec, "y")
    basis_weights = weights[:l] + [None, None] + weights[l + 2:]
    dd = spec.degree_data
    deg = lambda s: dd[s + 1]
    classes: dict[Fraction, list] = {}
    for m in range(nn):
        for i in range(nn):
            for j in range(nn):
                classes.setdefault(deg(i) + deg(j) - deg(m), []).append((m, i, j))
    bases = {c: (weighted_basis(basis_weights, c) if c >= 0 else []) for c in classes}
    need = max(len(b) for b in bases.values()) + 6
    rng = random.Random(seed)
    Gm = [[to_mod(x) for x in row] for row in x_metric(spec)]
    points, values = [], []
    while len(points) < need:
        xs = [rng.randrange(2, PRIME - 1) for _ in range(l)]
        p, q = rng.randrange(2, PRIME - 1), rng.randrange(2, PRIME - 1)
        pt = _FourierPoint(spec, xs, p, q)
        try:
            vals = _christoffel_values(spec, pt, Gm)
        except AlgebraError:
            continue  # Jacobian degenerate at this point; draw again
        points.append(pt.monomial_values())
        values.append(vals)
    out = [[[None] * nn for _ in range(nn)] for _ in range(nn)]
    for c, members in sorted(classes.items()):
        basis = bases[c]
        if not basis:
            for (m, i, j) in members:
                if any(v[(m, i, j)] for v in values):
                    raise NonPolynomialResult(f"Gamma_{m + 1}^{i + 1}{j + 1} must vanish by degree")
                out[m][i][j] = LaurentPoly.zero(table)
            continue
        vander = [[_mono_mod(pv, e) for e in basis] for pv in points]
        rhs = [[v[key] for key in members] for v in values]
        try:
            sol = solve_mod(vander, rhs)
        except AlgebraError as exc:
            raise NonPolynomialResult(f"degree class {c}: {exc}") from exc
        for col, (m, i, j) in enumerate(members):
            try:
                coeffs = {e: rational_reconstruct(sol[r][col]) for r, e in enumerate(basis)}
            except ValueError as exc:
                raise NonPolynomialResult(f"Gamma_{m + 1}^{i + 1}{j + 1}: {exc}") from exc
            out[m][i][j] = LaurentPoly(table, coeffs)
    gamma = ChartTensor("y", table, tuple(tuple(tuple(r) for r in s) for s in out))
    if certify:
        if g is None:
            g = metric_g_y(spec)
        bad = christoffel_residuals(g, gamma)
        if bad:
            raise NonPolynomialResult(f"Christoffel certification failed at {bad[:3]}")
    return gamma


def _mono_mod(values: Sequence[int], e: Sequence[int], prime: int = PRIME) -> int:
    t = 1
    for x, k in zip(values, e):
        if k:
            t = t * pow(x, k, prime) % prime
    return t


def christoffel_residuals(g: ChartTensor, gamma: ChartTensor) -> list[tuple]:
    """Exact checks of a contravariant connection against a metric.

    Symmetric part: ``d_m g^{ij} = Gamma_m^{ij} + Gamma_m^{ji}``.
    Full connection: ``2 g^{sm} Gamma_m^{ij} = g^{im} d_m g^{js} + g^{sm} d_m g^{ji} - g^{jm} d_m g^{is}``.
    Returns failing index tuples.
    """
    nn = len(g.entries)
    names = [g.table.names[i] for i in range(nn)]
    dg = [[[g[i, j].diff(names[m]) for j in range(nn)] for i in range(nn)] for m in range(nn)]
    bad = []
    for m in range(nn):
        for i in range(nn):
            for j in range(nn):
                if dg[m][i][j] != gamma[m, i, j] + gamma[m, j, i]:
                    bad.append(("sym", m, i, j))
    zero = LaurentPoly.zero(g.table)
    for s in range(nn):
        for i in range(nn):
            for j in range(nn):
                lhs = sum((g[s, m] * gamma[m, i, j] for m in range(nn) if g[s, m]), zero).scale(2)
                rhs = zero
                for m in range(nn):
                    if g[i, m]:
                        rhs = rhs + g[i, m] * dg[m][j][s]
                    if g[s, m]:
                        rhs = rhs + g[s, m] * dg[m][j][i]
                    if g[j, m]:
                        rhs = rhs - g[j, m] * dg[m][i][s]
                if lhs != rhs:
                    bad.append(("koszul", s, i, j))
    return bad


def connection_of_constant_det(eta: ChartTensor) -> ChartTensor:
    """Contravariant Levi-Civita connection of a metric with constant determinant.

    The inverse metric is then polynomial, so the Koszul formula can be solved
    directly: ``Gamma_m^{ij} = 1/2 eta_{ms} K^{sij}``.
    """
    cov = covariant(eta)
    nn = len(eta.entries)
    names = eta.table.names
    dg = [[[eta[i, j].diff(names[m]) for j in range(nn)] for i in range(nn)] for m in range(nn)]
    zero = LaurentPoly.zero(eta.table)
    K = [[[None] * nn for _ in range(nn)] for _ in range(nn)]
    for s in range(nn):
        for i in range(nn):
            for j in range(nn):
                acc = zero
                for m in range(nn):
                    if eta[i, m]:
                        acc = acc + eta[i, m] * dg[m][j][s]
                    if eta[s, m]:
                        acc = acc + eta[s, m] * dg[m][j][i]
                    if eta[j, m]:
                        acc = acc - eta[j, m] * dg[m][i][s]
                K[s][i][j] = acc
    out = tuple(tuple(tuple(
        sum((cov[m][s] * K[s][i][j] for s in range(nn) if cov[m][s]), zero).scale(Fraction(1, 2))
        for j in range(nn)) for i in range(nn)) for m in range(nn))
    return ChartTensor(eta.chart, eta.table, out)


def covariant(eta: ChartTensor) -> list[list[LaurentPoly]]:
    """Inverse of a matrix with nonzero constant determinant, as polynomials."""
    mat = eta.matrix()
    det = determinant(mat)
    if not det or not det.is_constant():
        raise NonPolynomialResult(f"determinant {det} is not a nonzero constant")
    nn = mat.shape[0]
    inv = [[None] * nn for _ in range(nn)]
    for i in range(nn):
        for j in range(nn):
            minor = PolyMatrix([[mat[r, c] for c in range(nn) if c != i] for r in range(nn) if r != j]) \
                if nn > 1 else None
            cof = determinant(minor) if minor is not None else LaurentPoly.constant(eta.table, 1)
            inv[i][j] = cof.scale(Fraction((-1) ** (i + j)) / det.constant_value())
    return inv


def gamma_y(spec: GroupSpec, Gamma: ChartTensor) -> ChartTensor:
    """Connection of the flat metric: ``gamma = L_e Gamma``."""
    return Gamma.map(lambda p: lie_e(spec, p, Gamma.chart))


# ---------------------------------------------------------------------------
# chart change y -> z
# ---------------------------------------------------------------------------

def z_jacobian(spec: GroupSpec) -> list[list[Fraction]]:
    """``dz^a/dy^i`` for the linear change of coordinates."""
    l, k = spec.l, spec.k
    nn = l + 2
    J = [[Fraction(int(a == i)) for i in range(nn)] for a in range(nn)]
    J[k][k - 1] = Fraction(-1)            # z^{k+1} = y^{k+1} - y^k
    J[l] = [Fraction(0)] * nn
    J[l][l + 1] = Fraction(1)             # z^{l+1} = y^{l+2}
    J[l + 1] = [Fraction(0)] * nn
    J[l + 1][l] = J[l + 1][l + 1] = Fraction(1)  # z^{l+2} = y^{l+1} + y^{l+2}
    return J


def y_in_z(spec: GroupSpec, p: LaurentPoly) -> LaurentPoly:
    """Re-express a y-chart polynomial in z-chart variables."""
    l, k = spec.l, spec.k
    zt = chart_table(spec, "z")
    zv = lambda i: LaurentPoly.var(zt, f"z{i}")
    mapping = {f"y{i}": zv(i) for i in range(1, l + 1)}
    mapping[f"y{k + 1}"] = zv(k) + zv(k + 1)
    mapping[f"y{l + 1}"] = zv(l + 2) - zv(l + 1)
    mapping[f"y{l + 2}"] = zv(l + 1)
    mapping["E1"] = LaurentPoly.var(zt, "E2")
    mapping["E2"] = LaurentPoly.var(zt, "E1")
    return p.subs(mapping, zt)


def to_z_chart(spec: GroupSpec, tensor: ChartTensor) -> ChartTensor:
    """Transport a y-chart tensor (contravariant 2-tensor or connection) to the z-chart."""
    if tensor.chart != "y":
        raise ValueError("expected a y-chart tensor")
    J = z_jacobian(spec)
    nn = spec.l + 2
    zt = chart_table(spec, "z")
    conv = tensor.map(lambda p: y_in_z(spec, p))
    zero = LaurentPoly.zero(zt)
    if tensor.rank == 2:
        rows = PolyMatrix(conv.entries).transform(J).rows
        return ChartTensor("z", zt, as_tuple_matrix(rows))
    Jinv = solve_rational(J, [[Fraction(int(i == j)) for j in range(nn)] for i in range(nn)],
                          require_unique=True).values  # dy^c/dz^m
    out = []
    for m in range(nn):
        acc = [[zero] * nn for _ in range(nn)]
        for c in range(nn):
            f = Jinv[c][m]
            if f:
                tr = PolyMatrix(conv.entries[c]).transform(J).rows
                acc = [[acc[i][j] + tr[i][j].scale(f) for j in range(nn)] for i in range(nn)]
        out.append(as_tuple_matrix(acc))
    return ChartTensor("z", zt, tuple(out))


# ---------------------------------------------------------------------------
# numerics on x-space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class XPoint:
    x: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.x)):
            raise ValueError("XPoint entries must be finite")


def random_xpoint(spec: GroupSpec, rng: np.random.Generator, scale: float = 0.3) -> XPoint:
    nn = spec.l + 2
    return XPoint(rng.uniform(-1, 1, nn) + 1j * scale * rng.uniform(-1, 1, nn))


def v_coordinates(spec: GroupSpec, x: np.ndarray) -> np.ndarray:
    l = spec.l
    v = np.empty(l + 1, dtype=complex)
    v[0] = x[0]
    v[1:l] = x[1:l] - x[0:l - 1]
    v[l] = -x[l - 1]
    return v


def numeric_invariants(spec: GroupSpec, x) -> np.ndarray:
    """``(ytilde_1, ..., ytilde_{l+2})`` at a point of x-space."""
    x = np.asarray(x.x if isinstance(x, XPoint) else x, dtype=complex)
    l, k = spec.l, spec.k
    q = np.exp(2j * np.pi * v_coordinates(spec, x))
    # elementary symmetric polynomials via the coefficients of prod (1 + q_s T)
    coeffs = np.array([1.0 + 0j])
    for qs in q:
        coeffs = np.convolve(coeffs, np.array([1.0, qs]))
    out = np.empty(l + 2, dtype=complex)
    r = spec.roots
    for j in range(1, l + 1):
        ph = float(r.d(j, k)) * x[l] + float(r.d(j, k + 1)) * x[l + 1]
        out[j - 1] = np.exp(2j * np.pi * ph) * coeffs[j]
    out[l] = np.exp(2j * np.pi * x[l])
    out[l + 1] = np.exp(2j * np.pi * x[l + 1])
    return out


def y_coordinates(spec: GroupSpec, x) -> np.ndarray:
    """Numeric y-chart coordinates, including ``y^{l+1} = 2 pi i x_{l+1}``."""
    x = np.asarray(x.x if isinstance(x, XPoint) else x, dtype=complex)
    yt = numeric_invariants(spec, x)
    y = yt.copy()
    y[spec.l] = 2j * np.pi * x[spec.l]
    y[spec.l + 1] = 2j * np.pi * x[spec.l + 1]
    return y


def y_table_values(spec: GroupSpec, y: np.ndarray) -> np.ndarray:
    """Values for every variable of the y-chart table from y-coordinates."""
    return np.concatenate([y, np.exp(y[spec.l:spec.l + 2])])


def weyl_and_translation_images(spec: GroupSpec, x: np.ndarray, rng: np.random.Generator):
    """Images of ``x`` under group elements: (label, x')."""
    l, k = spec.l, spec.k
    out = [("identity", x.copy())]
    # Weyl group: permute v, then rebuild x as partial sums
    v = v_coordinates(spec, x)
    perm = rng.permutation(l + 1)
    xp = x.copy()
    xp[:l] = np.cumsum(v[perm])[:l]
    out.append(("permutation", xp))
    # coroot lattice: integer shifts of x_1..x_l
    xc = x.copy()
    xc[:l] += rng.integers(-3, 4, l)
    out.append(("coroot", xc))
    xs = xp.copy()
    xs[:l] += rng.integers(-3, 4, l)
    out.append(("permutation+coroot", xs))
    r = spec.roots
    for nu, name in ((0, "omega_k-shift"), (1, "omega_k+1-shift")):
        xw = x.copy()
        for j in range(1, l + 1):
            xw[j - 1] += float(r.d(j, k + nu))
        xw[l + nu] -= 1
        out.append((name, xw))
    return out


@dataclass
class InvarianceReport:
    max_deviation: float
    per_transform: dict[str, float]
    points: int


def invariance_spotcheck(spec: GroupSpec, x: XPoint | None = None, seed: int = 0,
                         points: int = 1) -> InvarianceReport:
    rng = np.random.default_rng(seed)
    per: dict[str, float] = {}
    for p in range(points):
        xp = x if (x is not None and p == 0) else random_xpoint(spec, rng)
        base = numeric_invariants(spec, xp.x)
        for label, img in weyl_and_translation_images(spec, xp.x, rng):
            dev = np.max(np.abs(numeric_invariants(spec, img) - base) / np.maximum(1.0, np.abs(base)))
            per[label] = max(per.get(label, 0.0), float(dev))
    return InvarianceReport(max(per.values()), per, points)


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------

@dataclass
class OrbitData:
    spec: GroupSpec
    g: ChartTensor
    eta: ChartTensor
    Gamma: ChartTensor | None = None

    @cached_property
    def gamma(self) -> ChartTensor:
        if self.Gamma is None:
            raise ValueError("Christoffel symbols were not computed")
        return gamma_y(self.spec, self.Gamma)


def compute_orbit(spec: GroupSpec, christoffel: bool = True) -> OrbitData:
    g = metric_g_y(spec)
    eta = eta_y(spec, g)
    Gamma = christoffel_y(spec, g) if christoffel else None
    return OrbitData(spec, g, eta, Gamma)
