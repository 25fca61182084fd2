"""Numeric Landau-Ginzburg side: trigonometric superpotentials and residue metrics.

Everything in the angle variable ``phi`` is moved to ``u = exp(i phi)``:

    lambda(u) = N(u) / (u^m (u - a_{l+2})),   N(u) = u^{l+1} + a_1 u^l + ... + a_{l+1},

with ``m = l - k``.  Writing ``theta = u d/du`` we have ``d/dphi = i theta``, so
critical points in ``phi`` are the roots of the numerator of ``theta lambda`` and
``lambda''(psi) = -theta^2 lambda``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._parallel import ordered_map
from .algebra import LaurentPoly, NumericPolys
from .orbit import (
    GroupSpec,
    OrbitData,
    XPoint,
    chart_table,
    compute_orbit,
    coord,
    numeric_invariants,
    random_xpoint,
    v_coordinates,
    y_coordinates,
    y_table_values,
)


class LGError(Exception):
    pass


class ZeroCoordinate(LGError):
    pass


class DegenerateCritical(LGError):
    pass


class JacobianSingular(LGError):
    pass


class MismatchBeyondTolerance(LGError):
    pass


QUAD_NODES = 256


# ---------------------------------------------------------------------------
# superpotential
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LGPoint:
    """Coefficients ``a_1, ..., a_{l+2}`` of a superpotential."""

    spec: GroupSpec
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        if a.shape != (self.spec.l + 2,):
            raise ValueError(f"expected {self.spec.l + 2} coefficients, got {a.shape}")
        if a[-2] == 0 or a[-1] == 0:
            raise ZeroCoordinate("a_{l+1} and a_{l+2} must be nonzero")
        object.__setattr__(self, "a", a)

    @property
    def pole(self) -> complex:
        return complex(self.a[-1])

    @property
    def numerator(self) -> np.poly1d:
        return np.poly1d(np.concatenate([[1.0 + 0j], self.a[:-1]]))

    def theta_numerator(self) -> np.poly1d:
        """Numerator of ``theta lambda`` over ``u^m (u - a_{l+2})^2``; degree l+2, leading coeff k."""
        N = self.numerator
        lin = np.poly1d([1.0, -self.pole])
        u = np.poly1d([1.0, 0.0])
        return u * N.deriv() * lin - self.spec.m * N * lin - u * N

    def value(self, u):
        u = np.asarray(u, dtype=complex)
        return self.numerator(u) / (u ** self.spec.m * (u - self.pole))

    def theta(self, u):
        u = np.asarray(u, dtype=complex)
        return self.theta_numerator()(u) / (u ** self.spec.m * (u - self.pole) ** 2)

    def partials(self, u) -> np.ndarray:
        """``d lambda / d a_p`` at fixed ``u``; result shape ``u.shape + (l+2,)``."""
        u = np.asarray(u, dtype=complex)
        l = self.spec.l
        base = 1.0 / (u ** self.spec.m * (u - self.pole))
        out = np.empty(u.shape + (l + 2,), dtype=complex)
        for p in range(1, l + 2):
            out[..., p - 1] = u ** (l + 1 - p) * base
        out[..., l + 1] = self.value(u) / (u - self.pole)
        return out

    def shifted(self, c: complex) -> "LGPoint":
        """``a_k -> a_k + c``, ``a_{k+1} -> a_{k+1} - c a_{l+2}``: moves every critical value by ``c``."""
        k = self.spec.k
        a = self.a.copy()
        a[k - 1] += c
        a[k] -= c * self.pole
        return LGPoint(self.spec, a)


def lg_map_polys(spec: GroupSpec) -> list[LaurentPoly]:
    """The coefficients ``a_p`` as Laurent polynomials on the y-chart."""
    l, k, m = spec.l, spec.k, spec.m
    yt = chart_table(spec, "y")
    E1 = LaurentPoly.var(yt, "E1")
    E2 = LaurentPoly.var(yt, "E2")
    out = []
    for j in range(1, k + 1):
        out.append(LaurentPoly.var(yt, coord(spec, "y", j)).scale((-1) ** j))
    for s in range(1, m + 1):
        j = k + s
        out.append((LaurentPoly.var(yt, coord(spec, "y", j)) * E1 ** s * E2 ** (s - 1)).scale((-1) ** j))
    out.append((E1 ** (m + 1) * E2 ** m).scale((-1) ** (l + 1)))
    out.append(E1)
    return out


def from_orbit_point(spec: GroupSpec, ytilde) -> LGPoint:
    """Superpotential coefficients from numeric invariants ``(ytilde_1, ..., ytilde_{l+2})``."""
    yt = np.asarray(ytilde, dtype=complex)
    l, k, m = spec.l, spec.k, spec.m
    if yt.shape != (l + 2,):
        raise ValueError(f"expected {l + 2} invariants")
    p, q = yt[l], yt[l + 1]
    if p == 0 or q == 0:
        raise ZeroCoordinate("ytilde_{l+1} and ytilde_{l+2} must be nonzero")
    a = np.empty(l + 2, dtype=complex)
    for j in range(1, k + 1):
        a[j - 1] = (-1) ** j * yt[j - 1]
    for s in range(1, m + 1):
        j = k + s
        a[j - 1] = (-1) ** j * yt[j - 1] * p ** s * q ** (s - 1)
    a[l] = (-1) ** (l + 1) * p ** (m + 1) * q ** m
    a[l + 1] = p
    return LGPoint(spec, a)


# ---------------------------------------------------------------------------
# critical points
# ---------------------------------------------------------------------------

@dataclass
class CriticalData:
    U: np.ndarray            # exp(i psi_alpha)
    values: np.ndarray       # u_alpha = lambda(psi_alpha)
    second: np.ndarray       # lambda''(psi_alpha), derivative in phi
    residual: float          # max |lambda'(psi)| / max(1, |lambda(psi)|)

    @property
    def psi(self) -> np.ndarray:
        return -1j * np.log(self.U)

    def __len__(self) -> int:
        return len(self.U)


def _newton(P: np.poly1d, z: complex, steps: int = 60) -> complex:
    dP = P.deriv()
    for _ in range(steps):
        d = dP(z)
        if d == 0:
            break
        step = P(z) / d
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def critical_points(p: LGPoint, sep: float = 1e-8, guard: float = 1e-10) -> CriticalData:
    P = p.theta_numerator()
    # companion-matrix eigenvalues, then Newton
    U = np.array([_newton(P, z) for z in np.roots(P.coeffs)], dtype=complex)
    n = p.spec.l + 2
    if len(U) != n:
        raise DegenerateCritical(f"expected {n} critical points, found {len(U)}")
    for i in range(n):
        if abs(U[i]) < guard or abs(U[i] - p.pole) < guard:
            raise DegenerateCritical("critical point at 0 or at the pole")
        for j in range(i):
            if abs(U[i] - U[j]) < sep * max(1.0, abs(U[i])):
                raise DegenerateCritical("coincident critical points")
    order = np.lexsort((U.imag, U.real))
    U = U[order]
    vals = p.value(U)
    dP = P.deriv()
    second = -U * dP(U) / (U ** p.spec.m * (U - p.pole) ** 2)
    if np.any(second == 0):
        raise DegenerateCritical("degenerate critical point")
    res = float(np.max(np.abs(p.theta(U)) / np.maximum(1.0, np.abs(vals))))
    return CriticalData(U, vals, second, res)


def match_roots(ref: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Permutation ``perm`` with ``new[perm[i]]`` nearest to ``ref[i]``."""
    perm = []
    free = list(range(len(new)))
    for r in ref:
        j = min(free, key=lambda t: abs(new[t] - r))
        free.remove(j)
        perm.append(j)
    return np.array(perm)


# ---------------------------------------------------------------------------
# residue metrics
# ---------------------------------------------------------------------------

@dataclass
class ResidueMetrics:
    eta_diag: np.ndarray     # covariant, canonical coordinates
    g_diag: np.ndarray
    jac: np.ndarray          # jac[alpha, p] = d u_alpha / d a_p
    eta_a: np.ndarray        # covariant, a-coordinates
    g_a: np.ndarray
    quad_eta_a: np.ndarray
    quad_g_a: np.ndarray
    quadrature_err: float    # relative, worst of eta and g, a-coordinates and canonical diagonal

    @property
    def eta_inv_diag(self) -> np.ndarray:
        return 1.0 / self.eta_diag

    @property
    def g_inv_diag(self) -> np.ndarray:
        return 1.0 / self.g_diag


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def quadrature_radii(p: LGPoint, crit: CriticalData) -> np.ndarray:
    """A tenth of the distance to the nearest other singularity of either form.

    Besides the other critical points, 0 and the pole, the zeros of lambda
    count too: the intersection-form integrand divides by lambda.
    """
    U = crit.U
    zeros = np.roots(p.numerator.coeffs)
    r = np.empty(len(U))
    for i, z in enumerate(U):
        others = [abs(z - w) for j, w in enumerate(U) if j != i] + [abs(z), abs(z - p.pole)]
        others += list(np.abs(zeros - z))
        r[i] = 0.1 * min(others)
    return r


def residue_tensor(p: LGPoint, crit: CriticalData, rank: int, log: bool = False,
                   nodes: int = QUAD_NODES) -> np.ndarray:
    """``sum_alpha res_{psi_alpha} prod d_{a_i} lambda / lambda' dphi`` (divided by lambda if ``log``)

    by the trapezoidal rule on small circles in the u-plane.  In ``u`` the form is
    ``-prod(d lambda) du / (u theta lambda)``.
    """
    n = p.spec.l + 2
    out = np.zeros((n,) * rank, dtype=complex)
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    letters = "ijkl"[:rank]
    spec_in = ",".join("n" + c for c in letters)
    for z, r in zip(crit.U, quadrature_radii(p, crit)):
        u = z + r * w
        dl = p.partials(u)
        f = -(u - z) / (u * p.theta(u))
        if log:
            f = f / p.value(u)
        out += np.einsum(f"n,{spec_in}->{letters}", f, *([dl] * rank)) / nodes
    return out


def residue_metrics(p: LGPoint, crit: CriticalData, max_cond: float = 1e12) -> ResidueMetrics:
    k = p.spec.k
    sgn = (-1) ** (k + 1)
    eta_diag = sgn / crit.second
    g_diag = -1.0 / (crit.values * crit.second)
    jac = p.partials(crit.U)          # d u_alpha / d a_p = (d lambda / d a_p)(psi_alpha)
    if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > max_cond:
        raise JacobianSingular("critical-value Jacobian is singular")
    eta_a = jac.T @ np.diag(eta_diag) @ jac
    g_a = jac.T @ np.diag(g_diag) @ jac
    q_eta = sgn * residue_tensor(p, crit, 2)
    q_g = -residue_tensor(p, crit, 2, log=True)
    inv = np.linalg.inv(jac)
    can_eta = inv.T @ q_eta @ inv
    can_g = inv.T @ q_g @ inv
    err = max(_rel(q_eta, eta_a), _rel(q_g, g_a),
              _rel(can_eta, np.diag(eta_diag)), _rel(can_g, np.diag(g_diag)))
    return ResidueMetrics(eta_diag, g_diag, jac, eta_a, g_a, q_eta, q_g, err)


def shift_derivative_error(p: LGPoint, crit: CriticalData, h: float = 1e-3) -> float:
    """``(-1)^k d/dc`` of ``g^{alpha alpha} = -u_alpha lambda''`` along the unity shift vs ``eta^{alpha alpha}``.

    Fourth-order central differences.
    """
    k = p.spec.k
    vals = {}
    for c in (-2, -1, 1, 2):
        cc = critical_points(p.shifted(c * h))
        perm = match_roots(crit.U, cc.U)
        vals[c] = -cc.values[perm] * cc.second[perm]
    deriv = (-1) ** k * (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * h)
    eta_up = (-1) ** (k + 1) * crit.second
    return _rel(deriv, eta_up)


# ---------------------------------------------------------------------------
# angle chart
# ---------------------------------------------------------------------------

@dataclass
class PhiChart:
    phi: np.ndarray          # phi_1 .. phi_{l+2}
    varpi: np.ndarray        # x_1, x_2 - x_1, ..., x_l - x_{l-1}, x_{l+1}, x_{l+2}
    rho: complex
    point: LGPoint
    mismatch: float

    @property
    def nodes(self) -> np.ndarray:
        return np.exp(1j * self.phi)


def factorize_phi(x, spec: GroupSpec, *, seed: int = 0, tol: float = 1e-10) -> PhiChart:
    """Angles of the zeros and the pole of the superpotential attached to ``x``."""
    x = np.asarray(x.x if isinstance(x, XPoint) else x, dtype=complex)
    l, m = spec.l, spec.m
    rho = ((m + 1) * x[l] + m * x[l + 1]) / (l + 1)
    v = v_coordinates(spec, x)
    phi = np.empty(l + 2, dtype=complex)
    phi[:l + 1] = 2 * np.pi * (rho + v)
    phi[l + 1] = 2 * np.pi * x[l]
    varpi = np.concatenate([v[:l], x[l:l + 2]])
    Z = np.exp(1j * phi)
    for i in range(l + 2):
        for j in range(i):
            if abs(Z[i] - Z[j]) < 1e-8:
                raise DegenerateCritical("coincident zeros or pole")
    point = from_orbit_point(spec, numeric_invariants(spec, x))
    u = np.exp(1j * np.random.default_rng(seed).uniform(0, 2 * np.pi, 10))
    direct = np.prod(u[:, None] - Z[None, :l + 1], axis=1) / (u ** m * (u - Z[l + 1]))
    built = point.value(u)
    mismatch = _rel(built, direct)
    if mismatch > tol:
        raise MismatchBeyondTolerance(f"factorised and coefficient forms differ by {mismatch:.3e}")
    return PhiChart(phi, varpi, complex(rho), point, mismatch)


def diag_identity_matrix(crit: CriticalData, chart: PhiChart) -> np.ndarray:
    Z = chart.nodes
    U = crit.U
    w = crit.values * U ** 2 / crit.second
    D = 1.0 / (Z[:, None] - U[None, :])       # [a, alpha]
    return np.einsum("aj,bj,j->ab", D, D, w)


def diag_identity_expected(spec: GroupSpec) -> np.ndarray:
    n, k = spec.l + 2, spec.k
    out = np.eye(n) - 1.0 / k
    out[n - 1, n - 1] = -1.0 - 1.0 / k
    return out


def diag_identity_check(p: LGPoint, crit: CriticalData, spec: GroupSpec, chart: PhiChart) -> float:
    """Max abs deviation of the critical-point sum from its closed form."""
    return float(np.max(np.abs(diag_identity_matrix(crit, chart) - diag_identity_expected(spec))))


def varpi_derivatives(spec: GroupSpec, crit: CriticalData, chart: PhiChart) -> np.ndarray:
    """``D[alpha, beta] = d varpi_beta / d u_alpha``."""
    l, m = spec.l, spec.m
    Z = chart.nodes
    U = crit.U
    base = U[:, None] / (2j * np.pi * (Z[None, :] - U[:, None]) * crit.second[:, None])   # [alpha, b]
    out = np.empty((len(U), l + 2), dtype=complex)
    out[:, l] = base[:, l + 1]
    out[:, l + 1] = (base[:, :l + 1].sum(axis=1) - (m + 1) * base[:, l + 1]) / m
    for b in range(l):
        out[:, b] = base[:, b] - (m + 1) / (l + 1) * out[:, l] - m / (l + 1) * out[:, l + 1]
    return out


def varpi_pairings(spec: GroupSpec, crit: CriticalData, chart: PhiChart) -> np.ndarray:
    D = varpi_derivatives(spec, crit, chart)
    g_up = -crit.values * crit.second
    return np.einsum("ab,ac,a->bc", D, D, g_up)


def varpi_expected(spec: GroupSpec) -> np.ndarray:
    l, k, m = spec.l, spec.k, spec.m
    out = np.zeros((l + 2, l + 2))
    out[:l, :l] = np.eye(l) - 1.0 / (l + 1)
    out[l, l] = -(k + 1) / k
    out[l, l + 1] = out[l + 1, l] = 1.0
    out[l + 1, l + 1] = -(m + 1) / m
    return out / (4 * np.pi ** 2)


# ---------------------------------------------------------------------------
# multiplication from residues
# ---------------------------------------------------------------------------

def unity_vector(p: LGPoint) -> np.ndarray:
    """``e = (-1)^k (d/da_k - a_{l+2} d/da_{k+1})`` in a-coordinates."""
    k = p.spec.k
    e = np.zeros(p.spec.l + 2, dtype=complex)
    e[k - 1] = (-1) ** k
    e[k] = -(-1) ** k * p.pole
    return e


def balancing_scales(rm: ResidueMetrics) -> np.ndarray:
    """``s_p`` with ``a_p = s_p b_p`` making every column of ``d u / d b`` a unit vector.

    Raw a-coordinates can differ by many orders of magnitude (powers of
    ``ytilde_{l+1}``), so tensor residuals are measured in the ``b`` basis.
    """
    return 1.0 / np.linalg.norm(rm.jac, axis=0)


def residue_multiplication(p: LGPoint, crit: CriticalData, rm: ResidueMetrics,
                           sign: int | None = None) -> np.ndarray:
    """``C[i, j, l] = c^i_{jl}`` in a-coordinates, raising the residue 3-tensor with ``eta``.

    ``sign`` is the overall sign in front of the residue sum.  With the default
    ``-1`` the unity shift field ``e`` acts as the identity for every k; the
    idempotents are then ``(-1)^k d/du_alpha`` rather than ``d/du_alpha``.
    """
    if sign is None:
        sign = -1
    lower = sign * residue_tensor(p, crit, 3)
    s = balancing_scales(rm)
    eta_inv = s[:, None] * np.linalg.inv(s[:, None] * rm.quad_eta_a * s[None, :]) * s[None, :]
    return np.einsum("im,mjl->ijl", eta_inv, lower)


def to_balanced(C: np.ndarray, e: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Components of ``C^i_{jl}`` and a vector ``e`` in the ``b`` basis of :func:`balancing_scales`."""
    return C * s[None, :, None] * s[None, None, :] / s[:, None, None], e / s


def associativity_error(C: np.ndarray) -> float:
    lhs = np.einsum("ijm,mkl->ijkl", C, C)
    rhs = np.einsum("ikm,mjl->ijkl", C, C)
    return _rel(lhs, rhs) if np.any(lhs) else 0.0


def unity_error(C: np.ndarray, e: np.ndarray) -> float:
    act = np.einsum("ijl,j->il", C, e)
    return float(np.max(np.abs(act - np.eye(len(e)))))


# ---------------------------------------------------------------------------
# comparison with the orbit space
# ---------------------------------------------------------------------------

def euler_consistency(spec: GroupSpec) -> list[tuple[int, LaurentPoly]]:
    """Exact check that the y-chart Euler field acts on ``a_p`` with weight p/k (1/k on a_{l+2}).

    Returns the failing ``(p, defect)`` pairs.
    """
    from .frobenius import euler_field

    comps = euler_field(spec)["y"]
    field_ = {coord(spec, "y", i + 1): c for i, c in enumerate(comps)}
    n = spec.l + 2
    bad = []
    for idx, a in enumerate(lg_map_polys(spec), start=1):
        w = Fraction(idx, spec.k) if idx < n else Fraction(1, spec.k)
        d = a.apply_field(field_) - a.scale(w)
        if d:
            bad.append((idx, d))
    return bad


@dataclass
class Tolerances:
    polish: float = 1e-12
    quadrature: float = 1e-8
    diag_identity: float = 1e-9
    varpi: float = 1e-9
    pullback: float = 1e-8
    shift: float = 1e-6
    associativity: float = 1e-7
    unity: float = 1e-7
    rejection: float = 0.2


CHECK_KEYS = ("critical_residual", "quadrature", "diag_identity", "varpi", "pullback_g", "pullback_eta",
              "shift", "associativity", "unity")


def _limit(tol: Tolerances, key: str) -> float:
    return {
        "critical_residual": tol.polish, "quadrature": tol.quadrature, "diag_identity": tol.diag_identity,
        "varpi": tol.varpi, "pullback_g": tol.pullback, "pullback_eta": tol.pullback,
        "shift": tol.shift, "associativity": tol.associativity, "unity": tol.unity,
    }[key]


@dataclass
class SampleRecord:
    sample: int
    rejected: bool
    reason: str = ""
    roots: int = 0
    errors: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"sample": self.sample, "rejected": self.rejected}
        if self.rejected:
            d["reason"] = self.reason
        else:
            d["roots"] = self.roots
            d["max_rel_err"] = dict(self.errors)
        return d


@dataclass
class LGReport:
    spec: GroupSpec
    seed: int
    records: list[SampleRecord]
    euler_defects: list
    tol: Tolerances

    @property
    def accepted(self) -> list[SampleRecord]:
        return [r for r in self.records if not r.rejected]

    @property
    def rejection_rate(self) -> float:
        return 1.0 - len(self.accepted) / len(self.records) if self.records else 1.0

    def worst(self, key: str) -> float:
        return max((r.errors[key] for r in self.accepted), default=math.inf)

    def failures(self) -> list[str]:
        out = []
        n = self.spec.l + 2
        if any(r.roots != n for r in self.accepted):
            out.append("root_count")
        for key in CHECK_KEYS:
            if not self.worst(key) < _limit(self.tol, key):
                out.append(key)
        if self.euler_defects:
            out.append("euler")
        return out

    @property
    def too_many_rejections(self) -> bool:
        return self.rejection_rate > self.tol.rejection

    @property
    def passed(self) -> bool:
        return not self.failures() and not self.too_many_rejections

    def summary(self) -> dict:
        return {
            "samples": len(self.records),
            "accepted": len(self.accepted),
            "rejection_rate": self.rejection_rate,
            "euler_consistent": not self.euler_defects,
            "max_err": {key: self.worst(key) for key in CHECK_KEYS},
            "failures": self.failures(),
            "passed": self.passed,
        }


class _SymbolicMetrics:
    def __init__(self, orbit: OrbitData):
        spec = orbit.spec
        n = spec.l + 2
        self.spec = spec
        self.n = n
        self.ev = NumericPolys([orbit.g[i, j] for i in range(n) for j in range(n)]
                               + [orbit.eta[i, j] for i in range(n) for j in range(n)])
        amaps = lg_map_polys(spec)
        self.dmap = NumericPolys([a.diff(coord(spec, "y", i + 1)) for a in amaps for i in range(n)])

    def at(self, y: np.ndarray):
        vals = y_table_values(self.spec, y)
        n = self.n
        out = self.ev(vals)
        dm = self.dmap(vals).reshape(n, n)        # [p, i] = d a_p / d y^i
        return out[:n * n].reshape(n, n), out[n * n:].reshape(n, n), dm


def sample_check(spec: GroupSpec, sym: _SymbolicMetrics, seed: int, index: int) -> SampleRecord:
    rng = np.random.default_rng([seed, index])
    x = random_xpoint(spec, rng)
    try:
        chart = factorize_phi(x, spec, seed=index)
        p = chart.point
        crit = critical_points(p)
        rm = residue_metrics(p, crit)
        shift = shift_derivative_error(p, crit)
    except (DegenerateCritical, JacobianSingular, ZeroCoordinate) as exc:
        return SampleRecord(index, True, f"{type(exc).__name__}: {exc}")
    y = y_coordinates(spec, x)
    g_sym, eta_sym, dmap = sym.at(y)
    Jy = rm.jac @ dmap                         # d u_alpha / d y^i
    K = np.linalg.inv(Jy)
    g_res = K @ np.diag(rm.g_inv_diag) @ K.T
    eta_res = K @ np.diag(rm.eta_inv_diag) @ K.T
    C, e = to_balanced(residue_multiplication(p, crit, rm), unity_vector(p), balancing_scales(rm))
    errors = {
        "critical_residual": crit.residual,
        "quadrature": rm.quadrature_err,
        "diag_identity": diag_identity_check(p, crit, spec, chart),
        "varpi": float(np.max(np.abs(varpi_pairings(spec, crit, chart) - varpi_expected(spec)))),
        "pullback_g": _rel(g_res, g_sym),
        "pullback_eta": _rel(eta_res, eta_sym),
        "shift": shift,
        "associativity": associativity_error(C),
        "unity": unity_error(C, e),
    }
    return SampleRecord(index, False, roots=len(crit), errors=errors)


def lg_metric_check(spec: GroupSpec, seed: int = 42, samples: int = 20,
                        orbit: OrbitData | None = None, tol: Tolerances | None = None) -> LGReport:
    """Compare the orbit-space metrics with residue metrics at seeded random points."""
    if samples <= 0:
        raise ValueError("samples must be positive")
    orbit = orbit or compute_orbit(spec, christoffel=False)
    sym = _SymbolicMetrics(orbit)
    records = ordered_map(lambda i: sample_check(spec, sym, seed, i), range(samples))
    return LGReport(spec, seed, records, euler_consistency(spec), tol or Tolerances())
