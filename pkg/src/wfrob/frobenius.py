"""Flat coordinates, metrics in flat coordinates and the potential.

Charts follow :mod:`wfrob.orbit`.  In the z- and t-charts ``E1 = exp(c{l+1})``
and ``E2 = exp(c{l+2} - c{l+1})``; the markers have the same meaning in both
charts because ``t^{l+1} = z^{l+1}`` and ``t^{l+2} = z^{l+2}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    AlgebraError,
    Exponent,
    Inconsistent,
    LaurentPoly,
    PolyMatrix,
    solve_rational,
    weighted_basis,
)
from .orbit import (
    ChartTensor,
    GroupSpec,
    OrbitData,
    as_tuple_matrix,
    chart_table,
    chart_weights,
    compute_orbit,
    connection_of_constant_det,
    to_z_chart,
    z_jacobian,
)


class Underdetermined(AlgebraError):
    def __init__(self, msg: str, kernel=None):
        super().__init__(msg)
        self.kernel = kernel


class SubstitutionNonTerminating(AlgebraError):
    pass


class StructureViolation(AlgebraError):
    pass


# ---------------------------------------------------------------------------
# flat coordinates
# ---------------------------------------------------------------------------

@dataclass
class FlatCoords:
    """``t^alpha = z^alpha + h^alpha`` for ``alpha <= l``; the last two are ``z`` itself."""

    spec: GroupSpec
    t_of_z: tuple[LaurentPoly, ...]          # on the z-table, length l+2
    z_of_t: tuple[LaurentPoly, ...]          # on the t-table, length l+2

    @property
    def corrections(self) -> tuple[LaurentPoly, ...]:
        zt = self.t_of_z[0].table
        return tuple(self.t_of_z[a] - LaurentPoly.var(zt, f"z{a + 1}") for a in range(self.spec.l))


def _pde_operator(eta_z: ChartTensor, gamma_z: ChartTensor, t: LaurentPoly) -> list[LaurentPoly]:
    """Components of ``eta^{ai} d_i d_j t + gamma_j^{am} d_m t`` for all ``(a, j)``."""
    nn = len(eta_z.entries)
    names = eta_z.table.names[:nn]
    d1 = [t.diff(n) for n in names]
    d2 = [[d1[i].diff(names[j]) for j in range(nn)] for i in range(nn)]
    zero = LaurentPoly.zero(eta_z.table)
    out = []
    for a in range(nn):
        for j in range(nn):
            acc = zero
            for i in range(nn):
                if eta_z[a, i] and d2[i][j]:
                    acc = acc + eta_z[a, i] * d2[i][j]
                if gamma_z[j, a, i] and d1[i]:
                    acc = acc + gamma_z[j, a, i] * d1[i]
            out.append(acc)
    return out


def _linear_solve_polys(target: list[LaurentPoly], columns: list[list[LaurentPoly]]):
    """Find ``c`` with ``sum_mu c_mu columns[mu][r] = target[r]`` coefficientwise."""
    rows: dict[tuple[int, Exponent], int] = {}
    for r, p in enumerate(target):
        for e in p.terms:
            rows.setdefault((r, e), len(rows))
    for col in columns:
        for r, p in enumerate(col):
            for e in p.terms:
                rows.setdefault((r, e), len(rows))
    nrow = len(rows)
    ncol = len(columns)
    A = [[Fraction(0)] * ncol for _ in range(nrow)]
    b = [[Fraction(0)] for _ in range(nrow)]
    for mu, col in enumerate(columns):
        for r, p in enumerate(col):
            for e, c in p.terms.items():
                A[rows[(r, e)]][mu] = c
    for r, p in enumerate(target):
        for e, c in p.terms.items():
            b[rows[(r, e)]][0] = c
    if ncol == 0:
        if any(x[0] for x in b):
            raise Inconsistent("no unknowns but nonzero target")
        return [], []
    sol = solve_rational(A, b)
    return [v[0] for v in sol.values], sol.kernel


def flat_coordinates(spec: GroupSpec, eta_z: ChartTensor, gamma_z: ChartTensor) -> FlatCoords:
    """Solve the linear system for flat coordinates of ``eta`` in the z-chart.

    The ansatz excludes the linear monomials ``z^beta``, which removes the
    freedom of adding other flat coordinates of the same degree.
    """
    l = spec.l
    nn = l + 2
    zt = eta_z.table
    weights = chart_weights(spec, "z")
    dd = spec.degree_data
    t_of_z = []
    for alpha in range(1, l + 1):
        bw = list(weights)
        bw[alpha - 1] = None
        bw[l] = bw[l + 1] = None
        basis = [e for e in weighted_basis(bw, dd[alpha]) if sum(e) > 1 or any(e[l + 2:])]
        monos = [LaurentPoly.monomial(zt, e) for e in basis]
        zalpha = LaurentPoly.var(zt, f"z{alpha}")
        target = [-p for p in _pde_operator(eta_z, gamma_z, zalpha)]
        columns = [_pde_operator(eta_z, gamma_z, m) for m in monos]
        try:
            coeffs, kernel = _linear_solve_polys(target, columns)
        except Inconsistent as exc:
            raise Inconsistent(f"no polynomial flat coordinate t{alpha}: {exc}") from exc
        if kernel:
            raise Underdetermined(f"flat coordinate t{alpha} is not unique", kernel)
        t = zalpha
        for c, m in zip(coeffs, monos):
            if c:
                t = t + m.scale(c)
        t_of_z.append(t)
    t_of_z.append(LaurentPoly.var(zt, f"z{l + 1}"))
    t_of_z.append(LaurentPoly.var(zt, f"z{l + 2}"))
    z_of_t = invert_flat(spec, t_of_z)
    return FlatCoords(spec, tuple(t_of_z), z_of_t)


def invert_flat(spec: GroupSpec, t_of_z: list[LaurentPoly]) -> tuple[LaurentPoly, ...]:
    """``z(t)`` by substitution in increasing degree.

    ``h^alpha`` only involves ``z^beta`` of strictly lower degree (its other
    factors have positive weight), so each step uses already inverted ones.
    """
    l = spec.l
    tt = chart_table(spec, "t")
    zt = t_of_z[0].table
    dd = spec.degree_data
    order = sorted(range(1, l + 1), key=lambda a: (dd[a], a))
    done: dict[str, LaurentPoly] = {
        f"z{l + 1}": LaurentPoly.var(tt, f"t{l + 1}"),
        f"z{l + 2}": LaurentPoly.var(tt, f"t{l + 2}"),
    }
    for alpha in order:
        h = t_of_z[alpha - 1] - LaurentPoly.var(zt, f"z{alpha}")
        for name in zt.names:
            if name.startswith("z") and h.uses(name) and name not in done:
                raise SubstitutionNonTerminating(
                    f"h^{alpha} uses {name}, which is not of lower degree")
        done[f"z{alpha}"] = LaurentPoly.var(tt, f"t{alpha}") - h.subs(done, tt)
    return tuple(done[f"z{a}"] for a in range(1, l + 3))


def z_to_t(fc: FlatCoords, p: LaurentPoly) -> LaurentPoly:
    l = fc.spec.l
    tt = fc.z_of_t[0].table
    mapping = {f"z{a}": fc.z_of_t[a - 1] for a in range(1, l + 3)}
    return p.subs(mapping, tt)


def t_to_z(fc: FlatCoords, p: LaurentPoly) -> LaurentPoly:
    l = fc.spec.l
    zt = fc.t_of_z[0].table
    mapping = {f"t{a}": fc.t_of_z[a - 1] for a in range(1, l + 3)}
    return p.subs(mapping, zt)


def _push(fc: FlatCoords, m: ChartTensor) -> list[list[LaurentPoly]]:
    """``dt^a/dz^i dt^b/dz^j m^{ij}`` as z-polynomials."""
    nn = fc.spec.l + 2
    names = m.table.names[:nn]
    jac = [[fc.t_of_z[a].diff(names[i]) for i in range(nn)] for a in range(nn)]
    zero = LaurentPoly.zero(m.table)
    mid = [[sum((m[i, j] * jac[b][j] for j in range(nn) if m[i, j] and jac[b][j]), zero)
            for b in range(nn)] for i in range(nn)]
    return [[sum((jac[a][i] * mid[i][b] for i in range(nn) if jac[a][i] and mid[i][b]), zero)
             for b in range(nn)] for a in range(nn)]


def eta_t(fc: FlatCoords, eta_z: ChartTensor) -> list[list[Fraction]]:
    """The flat metric in flat coordinates; raises unless every entry is constant."""
    rows = _push(fc, eta_z)
    out = []
    for a, r in enumerate(rows):
        row = []
        for b, p in enumerate(r):
            if not p.is_constant():
                raise StructureViolation(f"eta^{a + 1}{b + 1}(t) is not constant: {p}")
            row.append(p.constant_value())
        out.append(row)
    return out


def metric_g_t(fc: FlatCoords, g_z: ChartTensor) -> ChartTensor:
    rows = _push(fc, g_z)
    tt = fc.z_of_t[0].table
    return ChartTensor("t", tt, as_tuple_matrix([[z_to_t(fc, p) for p in r] for r in rows]))


def check_t_chart_structure(spec: GroupSpec, fc: FlatCoords, eta: list[list[Fraction]],
                            g_t: ChartTensor) -> list[str]:
    """Structural facts of the flat chart; returns a list of violations."""
    l, k = spec.l, spec.k
    nn = l + 2
    dd = spec.degree_data
    tt = g_t.table
    bad = []
    for i in range(1, nn + 1):
        for j in range(1, nn + 1):
            v = eta[i - 1][j - 1]
            if j == dd.flat_dual[i]:
                if v == 0:
                    bad.append(f"eta^{i}{j} vanishes on the antidiagonal")
            elif v != 0:
                bad.append(f"eta^{i}{j} = {v} off the antidiagonal")
        if eta[i - 1][l] != int(i == k + 1):
            bad.append(f"eta^{i},{l + 1} != delta")
        if eta[i - 1][l + 1] != int(i == k):
            bad.append(f"eta^{i},{l + 2} != delta")
    for a in range(1, l + 1):
        if g_t[a - 1, l + 1] != LaurentPoly.var(tt, f"t{a}").scale(dd[a]):
            bad.append(f"g^{a},{l + 2}(t) != d_a t^a")
    consts = {(l, l): Fraction(l - k + 1, l - k), (l, l + 1): Fraction(1, l - k),
              (l + 1, l + 1): Fraction(l, k * (l - k))}
    for (i, j), v in consts.items():
        if g_t[i, j] != LaurentPoly.constant(tt, v):
            bad.append(f"g^{i + 1},{j + 1}(t) = {g_t[i, j]} != {v}")
    weights = chart_weights(spec, "t")
    for a in range(nn):
        for b in range(nn):
            if not g_t[a, b].is_homogeneous(weights, dd[a + 1] + dd[b + 1]):
                bad.append(f"g^{a + 1}{b + 1}(t) not homogeneous")
    g0 = g_t[k, l] - LaurentPoly.var(tt, f"t{k}") - LaurentPoly.var(tt, f"t{k + 1}")
    for name in (f"t{k}", f"t{k + 1}", f"t{l + 1}", f"t{l + 2}"):
        if g0.uses(name):
            bad.append(f"g_0 in g^{k + 1},{l + 1}(t) depends on {name}")
    if not g0.is_homogeneous(weights, Fraction(1)):
        bad.append("g_0 is not homogeneous of degree 1")
    return bad


def check_gamma_flat_chart(spec: GroupSpec, fc: FlatCoords, g_z: ChartTensor,
                           Gamma_z: ChartTensor) -> list[str]:
    """``Gamma^{l+2,i}_c(t) = d_i delta_c^i``, checked in the dz basis.

    With ``t^{l+2} = z^{l+2}``:
    ``sum_b g^{l+2,b} d_b d_c t^i + sum_b d_b t^i Gamma^{l+2,b}_c(z) = d_i d_c t^i``.
    """
    l = spec.l
    nn = l + 2
    names = g_z.table.names[:nn]
    dd = spec.degree_data
    zero = LaurentPoly.zero(g_z.table)
    bad = []
    top = nn - 1
    for i in range(nn):
        t = fc.t_of_z[i]
        d1 = [t.diff(n) for n in names]
        for c in range(nn):
            lhs = zero
            for b in range(nn):
                if g_z[top, b]:
                    lhs = lhs + g_z[top, b] * d1[b].diff(names[c])
                if d1[b] and Gamma_z[c, top, b]:
                    lhs = lhs + d1[b] * Gamma_z[c, top, b]
            if lhs != d1[c].scale(dd[i + 1]):
                bad.append(f"Gamma^{nn},{i + 1}_{c + 1}")
    return bad


# ---------------------------------------------------------------------------
# Euler field
# ---------------------------------------------------------------------------

def euler_field(spec: GroupSpec) -> dict[str, list]:
    """Components of ``E`` per chart: polynomials for the graded slots, constants last."""
    l, k = spec.l, spec.k
    dd = spec.degree_data
    out = {}
    yt = chart_table(spec, "y")
    ycomp = [LaurentPoly.var(yt, f"y{j}").scale(dd[j]) for j in range(1, l + 1)]
    ycomp += [LaurentPoly.constant(yt, Fraction(1, k)), LaurentPoly.constant(yt, Fraction(1, l - k))]
    out["y"] = ycomp
    from .orbit import y_in_z
    J = z_jacobian(spec)
    zt = chart_table(spec, "z")
    zcomp = []
    for a in range(l + 2):
        acc = LaurentPoly.zero(zt)
        for i in range(l + 2):
            if J[a][i]:
                acc = acc + y_in_z(spec, ycomp[i]).scale(J[a][i])
        zcomp.append(acc)
    out["z"] = zcomp
    tt = chart_table(spec, "t")
    tcomp = [LaurentPoly.var(tt, f"t{j}").scale(dd[j]) for j in range(1, l + 1)]
    tcomp += [LaurentPoly.constant(tt, Fraction(1, l - k)),
              LaurentPoly.constant(tt, Fraction(l, k * (l - k)))]
    out["t"] = tcomp
    return out


def euler_weights(spec: GroupSpec) -> list[Fraction]:
    """``(d_1, ..., d_l, 1/(l-k), l/(k(l-k)))``: the t-chart Euler field coefficients."""
    dd = spec.degree_data
    return [dd[j] for j in range(1, spec.l + 1)] + [Fraction(1, spec.m), Fraction(spec.l, spec.k * spec.m)]


def apply_euler(spec: GroupSpec, p: LaurentPoly, comps: list[LaurentPoly] | None = None) -> LaurentPoly:
    tt = p.table
    if comps is None:
        comps = euler_field(spec)["t"]
    return p.apply_field({tt.names[a]: comps[a] for a in range(spec.l + 2)})


# ---------------------------------------------------------------------------
# potential
# ---------------------------------------------------------------------------

@dataclass
class Potential:
    """``F = poly + log_coeff * (t^v)^2 log t^v`` with ``v = log_var``."""

    spec: GroupSpec
    poly: LaurentPoly
    log_coeff: Fraction = Fraction(1, 2)
    log_var: int = 0
    kernel: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.log_var:
            self.log_var = self.spec.k + 1

    @property
    def table(self):
        return self.poly.table

    def second_derivative(self, a: int, b: int) -> tuple[LaurentPoly, Fraction]:
        """``d_a d_b F`` (1-based) as ``(polynomial, log multiplicity)``.

        The log term contributes ``2c (log s + 3/2)`` for ``a = b = v``; the
        polynomial part returned already includes the ``3c`` constant and the
        second value is the coefficient of ``log s``.
        """
        tt = self.table
        p = self.poly.diff(f"t{a}").diff(f"t{b}")
        if a == b == self.log_var:
            return p + LaurentPoly.constant(tt, 3 * self.log_coeff), 2 * self.log_coeff
        return p, Fraction(0)

    def third_derivative(self, a: int, b: int, c: int) -> LaurentPoly:
        """``d_a d_b d_c F``; the log term gives ``2c / t^v`` on the diagonal."""
        tt = self.table
        p = self.poly.diff(f"t{a}").diff(f"t{b}").diff(f"t{c}")
        if a == b == c == self.log_var:
            p = p + LaurentPoly.var(tt, f"t{a}", -1).scale(2 * self.log_coeff)
        return p

    def log_descriptor(self) -> dict:
        from .algebra import render_fraction
        return {"log_coeff": render_fraction(self.log_coeff), "log_var": f"t{self.log_var}"}


def covariant_constant(eta: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(eta)
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    return solve_rational(eta, ident, require_unique=True).values


def cubic_skeleton(spec: GroupSpec, eta_cov: list[list[Fraction]]) -> LaurentPoly:
    """``1/2 (t^k)^2 t^{l+2} + 1/2 t^k sum eta_ab t^a t^b`` over ``a, b`` not in ``{k, l+2}``."""
    l, k = spec.l, spec.k
    tt = chart_table(spec, "t")
    tv = lambda a: LaurentPoly.var(tt, f"t{a}")
    F = (tv(k) ** 2 * tv(l + 2)).scale(Fraction(1, 2))
    idx = [a for a in range(1, l + 3) if a not in (k, l + 2)]
    for a in idx:
        for b in idx:
            c = eta_cov[a - 1][b - 1]
            if c:
                F = F + (tv(k) * tv(a) * tv(b)).scale(c / 2)
    return F


def _raised_hessian(spec: GroupSpec, eta: list[list[Fraction]], F: LaurentPoly,
                    log_coeff: Fraction) -> list[list[LaurentPoly]]:
    """``E(eta^{ae} eta^{bd} d_e d_d F)``, where the log term enters only via ``E(log s) = 1``."""
    nn = spec.l + 2
    tt = F.table
    comps = euler_field(spec)["t"]
    pot = Potential(spec, F, log_coeff)
    hess = {}
    for e in range(1, nn + 1):
        for d in range(e, nn + 1):
            p, logc = pot.second_derivative(e, d)
            val = apply_euler(spec, p, comps)
            if logc:
                # E(log s) = d_s * s * (1/s) = 1 for s = t^{k+1}
                val = val + LaurentPoly.constant(tt, logc)
            hess[(e, d)] = hess[(d, e)] = val
    zero = LaurentPoly.zero(tt)
    out = []
    for a in range(nn):
        row = []
        for b in range(nn):
            acc = zero
            for e in range(nn):
                if not eta[a][e]:
                    continue
                for d in range(nn):
                    if eta[b][d]:
                        acc = acc + hess[(e + 1, d + 1)].scale(eta[a][e] * eta[b][d])
            row.append(acc)
        out.append(row)
    return out


def potential_ansatz(spec: GroupSpec) -> list[LaurentPoly]:
    """Monomials allowed in the unknown part of ``F``."""
    l, k = spec.l, spec.k
    tt = chart_table(spec, "t")
    w = chart_weights(spec, "t")
    bw = list(w)
    bw[k - 1] = None
    bw[l] = bw[l + 1] = None
    monos = [LaurentPoly.monomial(tt, e) for e in weighted_basis(bw, Fraction(2))]
    forced = LaurentPoly.var(tt, f"t{k + 1}") ** 2 * LaurentPoly.var(tt, f"t{l + 1}")
    return monos + [forced]


def potential(spec: GroupSpec, eta: list[list[Fraction]], g_t: ChartTensor,
              extra_monomials: list[LaurentPoly] | None = None) -> Potential:
    """Solve ``g^{ab} = E(F^{ab})`` for the unknown part of ``F``.

    Kernel directions (terms invisible to the equations, necessarily of
    degree two in ``t`` only) are set to zero and recorded.
    """
    nn = spec.l + 2
    cov = covariant_constant(eta)
    rigid = cubic_skeleton(spec, cov)
    half = Fraction(1, 2)
    base = _raised_hessian(spec, eta, rigid, half)
    target = [g_t[a, b] - base[a][b] for a in range(nn) for b in range(nn)]
    monos = potential_ansatz(spec) + list(extra_monomials or [])
    columns = []
    for m in monos:
        h = _raised_hessian(spec, eta, m, Fraction(0))
        columns.append([h[a][b] for a in range(nn) for b in range(nn)])
    coeffs, kernel = _linear_solve_polys(target, columns)
    F = rigid
    for c, m in zip(coeffs, monos):
        if c:
            F = F + m.scale(c)
    ker_desc = []
    for v in kernel:
        kp = sum((m.scale(c) for c, m in zip(v, monos) if c), LaurentPoly.zero(rigid.table))
        if kp.total_degree() > 2 or any(kp.uses(n) for n in ("E1", "E2")):
            raise Underdetermined(f"unexpected kernel direction {kp}", kernel)
        ker_desc.append(kp.render())
    return Potential(spec, F, half, spec.k + 1, ker_desc)


def quadratic_remainder(spec: GroupSpec) -> LaurentPoly:
    l, k = spec.l, spec.k
    tt = chart_table(spec, "t")
    a, b = LaurentPoly.var(tt, f"t{k}"), LaurentPoly.var(tt, f"t{k + 1}")
    return ((a * a).scale(Fraction(l, 2 * k * (l - k))) + (a * b).scale(Fraction(1, l - k))
            + (b * b).scale(Fraction(l - k + 1, 2 * (l - k))))


def quasi_homogeneity_residual(pot: Potential, weights: list[Fraction] | None = None
                               ) -> tuple[LaurentPoly, Fraction]:
    """``E(F) - 2F - remainder`` as ``(polynomial part, coefficient of s^2 log s)``.

    For the log term ``c s^2 log s`` and ``E = ... + w_s s d/ds``, ``E`` gives
    ``w_s (2 c s^2 log s + c s^2)``.
    """
    spec = pot.spec
    tt = pot.table
    l = spec.l
    w = list(weights) if weights is not None else euler_weights(spec)
    comps = [LaurentPoly.var(tt, f"t{j}").scale(w[j - 1]) for j in range(1, l + 1)]
    comps += [LaurentPoly.constant(tt, w[l]), LaurentPoly.constant(tt, w[l + 1])]
    s = LaurentPoly.var(tt, f"t{pot.log_var}")
    ws = w[pot.log_var - 1]
    poly = apply_euler(spec, pot.poly, comps) - pot.poly.scale(2) + (s * s).scale(ws * pot.log_coeff)
    return poly - quadratic_remainder(spec), 2 * pot.log_coeff * (ws - 1)


def quasi_homogeneity_defect(pot: Potential) -> LaurentPoly:
    """Polynomial part of the quasi-homogeneity residual for the true Euler field."""
    poly, logc = quasi_homogeneity_residual(pot)
    assert logc == 0
    return poly


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

@dataclass
class FrobeniusData:
    spec: GroupSpec
    orbit: OrbitData
    g_z: ChartTensor
    eta_z: ChartTensor
    Gamma_z: ChartTensor
    gamma_z: ChartTensor
    flat: FlatCoords
    eta_t: list[list[Fraction]]
    g_t: ChartTensor
    potential: Potential


def build_frobenius(spec: GroupSpec, orbit: OrbitData | None = None) -> FrobeniusData:
    orbit = orbit or compute_orbit(spec)
    g_z = to_z_chart(spec, orbit.g)
    eta_z = to_z_chart(spec, orbit.eta)
    Gamma_z = to_z_chart(spec, orbit.Gamma)
    gamma_z = to_z_chart(spec, orbit.gamma)
    fc = flat_coordinates(spec, eta_z, gamma_z)
    et = eta_t(fc, eta_z)
    g_t = metric_g_t(fc, g_z)
    pot = potential(spec, et, g_t)
    return FrobeniusData(spec, orbit, g_z, eta_z, Gamma_z, gamma_z, fc, et, g_t, pot)


def eta_connection_z(eta_z: ChartTensor) -> ChartTensor:
    """Independent route to the flat connection, from ``eta(z)`` alone."""
    return connection_of_constant_det(eta_z)
