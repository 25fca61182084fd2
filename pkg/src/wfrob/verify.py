"""Independent checks of the Frobenius structure."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import LaurentPoly, NumericPolys
from .frobenius import (
    FrobeniusData,
    Potential,
    _raised_hessian,
    covariant_constant,
    euler_weights,
    quasi_homogeneity_residual,
)
from .orbit import ChartTensor, GroupSpec, y_table_values


class NearDiscriminant(Exception):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    exact: bool
    seconds: float = 0.0
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "exact": self.exact,
                "residual": self.residual, "detail": self.detail}


@dataclass
class CheckReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Check | None:
        return next((c for c in self.checks if not c.passed), None)

    def add(self, check: Check) -> None:
        self.checks.append(check)

    def extend(self, other: "CheckReport") -> None:
        self.checks.extend(other.checks)

    def sorted(self) -> "CheckReport":
        return CheckReport(sorted(self.checks, key=lambda c: c.name))


def timed(name: str, fn: Callable[[], tuple[bool, float, bool, str]]) -> Check:
    t0 = time.perf_counter()
    ok, res, exact, detail = fn()
    return Check(name, ok, res, exact, time.perf_counter() - t0, detail)


def _max_coeff(p: LaurentPoly) -> float:
    return max((abs(float(c)) for c in p.terms.values()), default=0.0)


# ---------------------------------------------------------------------------
# structure constants
# ---------------------------------------------------------------------------

@dataclass
class StructureConstants:
    """``lower[a][b][c] = d_a d_b d_c F`` and ``raised[a][b][c] = eta^{ae} lower[e][b][c]``."""

    spec: GroupSpec
    lower: list
    raised: list
    eta: list[list[Fraction]]


def structure_constants(F: Potential, eta: list[list[Fraction]]) -> StructureConstants:
    nn = F.spec.l + 2
    cache = {}
    for a in range(nn):
        for b in range(a, nn):
            for c in range(b, nn):
                cache[(a, b, c)] = F.third_derivative(a + 1, b + 1, c + 1)
    lower = [[[cache[tuple(sorted((a, b, c)))] for c in range(nn)] for b in range(nn)] for a in range(nn)]
    zero = LaurentPoly.zero(F.table)
    raised = [[[sum((lower[e][b][c].scale(eta[a][e]) for e in range(nn) if eta[a][e]), zero)
                for c in range(nn)] for b in range(nn)] for a in range(nn)]
    return StructureConstants(F.spec, lower, raised, eta)


def _wdvv_table(sc: StructureConstants):
    """``M[(a,b),(c,d)] = sum_m c_{abm} c^m_{cd}`` over unordered pairs."""
    nn = sc.spec.l + 2
    pairs = [(a, b) for a in range(nn) for b in range(a, nn)]
    zero = LaurentPoly.zero(sc.lower[0][0][0].table)
    M = {}
    for p in pairs:
        for q in pairs:
            acc = zero
            for m in range(nn):
                x = sc.lower[p[0]][p[1]][m]
                y = sc.raised[m][q[0]][q[1]]
                if x and y:
                    acc = acc + x * y
            M[(p, q)] = acc
    return M


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def wdvv_check(spec: GroupSpec, F: Potential, eta: list[list[Fraction]], *,
               seed: int = 0, points: int = 3) -> CheckReport:
    """Associativity ``c_{abm} c^m_{cd} = c_{acm} c^m_{bd}``.

    Both sides are Laurent polynomials (the log term only contributes
    ``1/t^{k+1}``), so the identity is compared exactly; a numeric evaluation
    at random points runs as a second, independent comparison.
    """
    report = CheckReport()
    sc = structure_constants(F, eta)
    nn = spec.l + 2
    t0 = time.perf_counter()
    M = _wdvv_table(sc)
    worst, offender = 0.0, ""
    quads = []
    for a in range(nn):
        for b in range(nn):
            for c in range(nn):
                for d in range(nn):
                    if b < c:
                        diff = M[(_pair(a, b), _pair(c, d))] - M[(_pair(a, c), _pair(b, d))]
                        quads.append((a, b, c, d, diff))
                        if diff:
                            r = _max_coeff(diff)
                            if r > worst or not offender:
                                worst, offender = r, f"({a + 1},{b + 1},{c + 1},{d + 1})"
    report.add(Check("wdvv_exact", not offender, worst, True, time.perf_counter() - t0,
                     f"offending quadruple {offender}" if offender else ""))
    # numeric belt-and-braces
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    table = F.table
    polys = [q[4] for q in quads]
    lhs_polys = [M[(_pair(a, b), _pair(c, d))] for a, b, c, d, _ in quads]
    nonzero = [p for p in polys + lhs_polys if p]
    if nonzero:
        ev = NumericPolys(polys + lhs_polys)
        vals = np.empty((points, len(table)), dtype=complex)
        for i in range(points):
            coords = rng.uniform(0.5, 1.5, spec.l + 2) + 0.3j * rng.uniform(-1, 1, spec.l + 2)
            vals[i] = np.concatenate([coords, _markers(spec, coords)])
        out = ev(vals)
        n = len(polys)
        scale = np.maximum(1.0, np.abs(out[:, n:]))
        res = float(np.max(np.abs(out[:, :n]) / scale))
    else:
        res = 0.0
    report.add(Check("wdvv_numeric", res < 1e-9, res, False, time.perf_counter() - t0))
    return report


def _markers(spec: GroupSpec, t: np.ndarray) -> np.ndarray:
    l = spec.l
    return np.array([np.exp(t[l]), np.exp(t[l + 1] - t[l])])


def intersection_check(spec: GroupSpec, F: Potential, eta: list[list[Fraction]],
                       g_t: ChartTensor) -> CheckReport:
    """``g^{ab}(t) = E(eta^{ae} eta^{bd} d_e d_d F)`` entrywise."""
    t0 = time.perf_counter()
    nn = spec.l + 2
    lhs = _raised_hessian(spec, eta, F.poly, F.log_coeff)
    bad = []
    worst = 0.0
    for a in range(nn):
        for b in range(nn):
            d = g_t[a, b] - lhs[a][b]
            if d:
                bad.append(f"({a + 1},{b + 1})")
                worst = max(worst, _max_coeff(d))
    report = CheckReport()
    report.add(Check("intersection_form", not bad, worst, True, time.perf_counter() - t0,
                     ",".join(bad)))
    return report


def unity_and_euler_check(spec: GroupSpec, F: Potential, eta: list[list[Fraction]],
                          euler: list[Fraction] | None = None) -> CheckReport:
    """``c^a_{k b} = delta^a_b`` exactly and ``[E, e] = -e`` for ``e = d/dt^k``.

    ``euler`` holds the linear coefficients of ``E`` (override for negative controls).
    """
    k = spec.k
    nn = spec.l + 2
    report = CheckReport()
    t0 = time.perf_counter()
    sc = structure_constants(F, eta)
    bad = []
    for a in range(nn):
        for b in range(nn):
            expect = LaurentPoly.constant(F.table, int(a == b))
            if sc.raised[a][k - 1][b] != expect:
                bad.append(f"({a + 1},{b + 1})")
    report.add(Check("unity", not bad, float(len(bad)), True, time.perf_counter() - t0, ",".join(bad)))
    # [E, e]^b = -e(E^b) since e has constant components; E^b = w_b t^b (+ const)
    t0 = time.perf_counter()
    w = list(euler) if euler is not None else euler_weights(spec)
    bracket = [Fraction(0)] * nn
    bracket[k - 1] = -w[k - 1] if k - 1 < spec.l else Fraction(0)
    target = [Fraction(-int(b == k - 1)) for b in range(nn)]
    dev = max(abs(float(x - y)) for x, y in zip(bracket, target))
    report.add(Check("euler_bracket", dev == 0, dev, True, time.perf_counter() - t0))
    # quasi-homogeneity L_E F - 2F = quadratic remainder
    t0 = time.perf_counter()
    defect, log_left = quasi_homogeneity_residual(F, w)
    report.add(Check("quasi_homogeneity", not defect and not log_left,
                     max(_max_coeff(defect), abs(float(log_left))), True, time.perf_counter() - t0))
    # unity condition on the third derivatives: d_k d_i d_j F = eta_ij
    t0 = time.perf_counter()
    cov = covariant_constant(eta)
    bad = [f"({i + 1},{j + 1})" for i in range(nn) for j in range(nn)
           if sc.lower[k - 1][i][j] != LaurentPoly.constant(F.table, cov[i][j])]
    report.add(Check("unity_third_derivative", not bad, float(len(bad)), True,
                     time.perf_counter() - t0, ",".join(bad)))
    return report


# ---------------------------------------------------------------------------
# numeric flatness of the pencil
# ---------------------------------------------------------------------------

class _MetricField:
    """Numeric ``(g + lam eta)`` and its inverse on the y-chart."""

    def __init__(self, spec: GroupSpec, g: ChartTensor, eta: ChartTensor):
        self.spec = spec
        self.nn = spec.l + 2
        flat = [g[i, j] for i in range(self.nn) for j in range(self.nn)]
        flat += [eta[i, j] for i in range(self.nn) for j in range(self.nn)]
        self.ev = NumericPolys(flat)

    def contravariant(self, y: np.ndarray, lam: complex) -> np.ndarray:
        """``y`` has shape (..., nn) of coordinates; returns (..., nn, nn)."""
        vals = np.concatenate([y, np.exp(y[..., self.spec.l:self.spec.l + 2])], axis=-1)
        out = self.ev(vals)
        n2 = self.nn * self.nn
        gm = out[..., :n2] + lam * out[..., n2:]
        return gm.reshape(y.shape[:-1] + (self.nn, self.nn))

    def covariant(self, y: np.ndarray, lam: complex) -> np.ndarray:
        return np.linalg.inv(self.contravariant(y, lam))


_OFFSETS = (-2, -1, 1, 2)


def _stencil(f):
    """``12 h`` times the 4th-order first derivative, as paired differences.

    Pairing symmetric samples first makes the result exactly zero on constant data.
    """
    return 8 * (f(1) - f(-1)) - (f(2) - f(-2))


def _curvature_fd(field_: _MetricField, y0: np.ndarray, lam: complex, h: float) -> np.ndarray:
    """Covariant Riemann tensor from 4th-order central differences of ``G = (g+lam eta)^{-1}``."""
    n = field_.nn
    offs = _OFFSETS
    # all stencil points for first and mixed second derivatives
    pts = [np.zeros(n, dtype=complex)]
    index = {(): 0}

    def add(key, vec):
        if key not in index:
            index[key] = len(pts)
            pts.append(vec)

    for a in range(n):
        for s in offs:
            v = np.zeros(n, dtype=complex)
            v[a] = s * h
            add(((a, s),), v)
        for b in range(a, n):
            for s in offs:
                for r in offs:
                    v = np.zeros(n, dtype=complex)
                    v[a] += s * h
                    v[b] += r * h
                    add(tuple(sorted(((a, s), (b, r)))), v)
    P = y0[None, :] + np.array(pts)
    G = field_.covariant(P, lam)
    d1 = np.zeros((n, n, n), dtype=complex)
    for a in range(n):
        d1[a] = _stencil(lambda s: G[index[((a, s),)]]) / (12 * h)
    d2 = np.zeros((n, n, n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            acc = _stencil(lambda s: _stencil(lambda r: G[index[tuple(sorted(((a, s), (b, r))))]]))
            d2[a, b] = d2[b, a] = acc / (144 * h * h)
    Gc = G[0]
    Ginv = np.linalg.inv(Gc)
    # Christoffel symbols of the first kind, then second kind
    first = 0.5 * (np.einsum("bac->abc", d1) + np.einsum("cab->abc", d1) - np.einsum("abc->abc", d1))
    # first[a,b,c] = 1/2 (d_b G_ac + d_c G_ab - d_a G_bc)
    chris = np.einsum("ea,abc->ebc", Ginv, first)
    R = 0.5 * (np.einsum("bcad->abcd", d2) + np.einsum("adbc->abcd", d2)
               - np.einsum("acbd->abcd", d2) - np.einsum("bdac->abcd", d2))
    R = R + np.einsum("ef,ebc,fad->abcd", Gc, chris, chris) - np.einsum("ef,ebd,fac->abcd", Gc, chris, chris)
    return R


def pencil_flatness_numeric(spec: GroupSpec, g: ChartTensor, eta: ChartTensor, *, seed: int = 0,
                            lambdas=(0, 1, 1j), points: int = 5, h: float = 1e-3,
                            tol: float = 1e-6, max_cond: float = 1e8) -> CheckReport:
    """Finite-difference curvature of ``g + lam eta`` at random points, Richardson-extrapolated."""
    report = CheckReport()
    field_ = _MetricField(spec, g, eta)
    rng = np.random.default_rng(seed)
    n = spec.l + 2
    for lam in lambdas:
        t0 = time.perf_counter()
        worst = 0.0
        done = 0
        attempts = 0
        while done < points:
            attempts += 1
            if attempts > 20 * points:
                raise NearDiscriminant("could not find well-conditioned sample points")
            y0 = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
            M = field_.contravariant(y0, lam)
            if np.linalg.cond(M) > max_cond:
                continue
            R1 = _curvature_fd(field_, y0, lam, h)
            R2 = _curvature_fd(field_, y0, lam, h / 2)
            R = (16 * R2 - R1) / 15
            worst = max(worst, float(np.max(np.abs(R))))
            done += 1
        report.add(Check(f"pencil_flat[lambda={lam}]", worst < tol, worst, False,
                         time.perf_counter() - t0))
    return report


# ---------------------------------------------------------------------------
# bundle
# ---------------------------------------------------------------------------

def exact_suite(fd: FrobeniusData) -> CheckReport:
    """All exact structural checks for one spec."""
    from .algebra import determinant
    from .frobenius import check_gamma_flat_chart, check_t_chart_structure
    from .orbit import christoffel_residuals, connection_of_constant_det, lie_e

    spec = fd.spec
    l, k = spec.l, spec.k
    dd = spec.degree_data
    report = CheckReport()

    def deg_checks():
        bad = [j for j in range(1, l + 3) if dd[j] + dd[dd.dual[j]] != 1]
        bad += [j for j in range(1, l + 3) if dd[j] + dd[dd.flat_dual[j]] != 1]
        ok = not bad and dd[k] == dd[k + 1] == 1 and all(dd[s] < 1 for s in range(1, l + 1) if s not in (k, k + 1))
        return ok, float(len(bad)), True, ""

    report.add(timed("degrees_duality", deg_checks))

    def det_eta():
        d = determinant(fd.orbit.eta.matrix())
        return (bool(d) and d.is_constant()), 0.0, True, f"det={d}"

    report.add(timed("det_eta_constant", det_eta))

    def double_lie():
        bad = []
        for i in range(l + 2):
            for j in range(l + 2):
                if lie_e(spec, fd.orbit.eta[i, j]):
                    bad.append(("g", i, j))
                for m in range(l + 2):
                    if lie_e(spec, fd.orbit.gamma[m, i, j]):
                        bad.append(("Gamma", m, i, j))
        return not bad, float(len(bad)), True, str(bad[:3]) if bad else ""

    report.add(timed("double_lie_derivative", double_lie))

    def christoffel():
        bad = christoffel_residuals(fd.orbit.g, fd.orbit.Gamma)
        return not bad, float(len(bad)), True, str(bad[:3]) if bad else ""

    report.add(timed("christoffel_certified", christoffel))

    def flat_connection():
        # gamma = L_e Gamma against the connection computed from eta alone
        other = connection_of_constant_det(fd.eta_z)
        bad = [(m, i, j) for m in range(l + 2) for i in range(l + 2) for j in range(l + 2)
               if other[m, i, j] != fd.gamma_z[m, i, j]]
        bad += [("vanish", j, i, nu) for nu in (0, 1) for i in range(l + 2) for j in range(l + 2)
                if fd.gamma_z[j, i, l + nu]]
        return not bad, float(len(bad)), True, str(bad[:3]) if bad else ""

    report.add(timed("flat_connection", flat_connection))

    def t_chart():
        bad = check_t_chart_structure(spec, fd.flat, fd.eta_t, fd.g_t)
        bad += check_gamma_flat_chart(spec, fd.flat, fd.g_z, fd.Gamma_z)
        return not bad, float(len(bad)), True, "; ".join(bad[:3])

    report.add(timed("t_chart_structure", t_chart))
    report.extend(wdvv_check(spec, fd.potential, fd.eta_t))
    report.extend(intersection_check(spec, fd.potential, fd.eta_t, fd.g_t))
    report.extend(unity_and_euler_check(spec, fd.potential, fd.eta_t))
    return report
