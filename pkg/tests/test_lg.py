import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from _shared import ALL_SPECS, EXAMPLE_SPECS
from wfrob.algebra import NumericPolys
from wfrob.lg import (
    DegenerateCritical, JacobianSingular, LGPoint, ZeroCoordinate, diag_identity_expected, diag_identity_check,
    associativity_error, critical_points, euler_consistency, factorize_phi, from_orbit_point,
    lg_map_polys, residue_metrics, residue_multiplication, shift_derivative_error,
    lg_metric_check, unity_error, unity_vector, varpi_expected, varpi_pairings,
)
from wfrob.orbit import GroupSpec, random_xpoint


def phi_derivative(p, psi, order, r=1e-2, nodes=64):
    """d^order/dphi^order of lambda(e^{i phi}) by the Cauchy integral formula."""
    w = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    f = p.value(np.exp(1j * (psi + r * w)))
    fact = 1 if order == 1 else 2
    return fact * np.mean(f * w ** (-order)) / r ** order


def sample(spec, seed):
    rng = np.random.default_rng(seed)
    x = random_xpoint(spec, rng)
    chart = factorize_phi(x, spec)
    return x, chart, chart.point, critical_points(chart.point)


# -- the coefficient map ----------------------------------------------------

def test_from_orbit_point_example():
    p = from_orbit_point(GroupSpec(2, 1), [1, 1, 1, 1])
    assert np.array_equal(p.a, np.array([-1, 1, -1, 1], dtype=complex))


@pytest.mark.parametrize("l,k", ALL_SPECS)
def test_symbolic_map_agrees(l, k):
    spec = GroupSpec(l, k)
    rng = np.random.default_rng(l + k)
    yt = rng.normal(size=l + 2) + 1j * rng.normal(size=l + 2)
    p = from_orbit_point(spec, yt)
    assert p.a[-1] == yt[l]
    vals = np.concatenate([yt[:l], np.log(yt[l:]), yt[l:]])   # markers carry the invariants
    sym = NumericPolys(lg_map_polys(spec))(vals)
    assert np.allclose(sym, p.a, rtol=1e-13)


def test_zero_coordinate():
    with pytest.raises(ZeroCoordinate):
        from_orbit_point(GroupSpec(2, 1), [1, 1, 0, 1])
    with pytest.raises(ZeroCoordinate):
        LGPoint(GroupSpec(2, 1), np.array([1, 1, 1, 0]))


@pytest.mark.parametrize("l,k", ALL_SPECS)
def test_theta_numerator_shape(l, k):
    p = from_orbit_point(GroupSpec(l, k), np.arange(1, l + 3) * (1 + 0.5j))
    P = p.theta_numerator()
    assert P.order == l + 2 and abs(P.coeffs[0] - k) < 1e-12


# -- critical points --------------------------------------------------------

@pytest.mark.parametrize("l,k", EXAMPLE_SPECS)
def test_root_count_many_points(l, k):
    spec = GroupSpec(l, k)
    rng = np.random.default_rng(2024)
    for _ in range(100):
        p = from_orbit_point(spec, oracles.ytilde(l, k, random_xpoint(spec, rng).x))
        crit = critical_points(p)
        assert len(crit) == l + 2
        assert crit.residual < 1e-12


@pytest.mark.parametrize("l,k", [(2, 1), (3, 2), (4, 1)])
def test_critical_data_against_phi_derivatives(l, k):
    _, _, p, crit = sample(GroupSpec(l, k), 5)
    scale = np.max(np.abs(crit.values))
    for psi, u, second in zip(crit.psi, crit.values, crit.second):
        assert abs(phi_derivative(p, psi, 1)) < 1e-9 * scale
        assert abs(phi_derivative(p, psi, 2) - second) < 1e-8 * max(1.0, abs(second))
        assert abs(p.value(np.exp(1j * psi)) - u) < 1e-12 * max(1.0, abs(u))


def test_branch_of_psi_is_irrelevant():
    _, _, p, crit = sample(GroupSpec(3, 1), 9)
    for psi, second in zip(crit.psi, crit.second):
        a = phi_derivative(p, psi, 2)
        b = phi_derivative(p, psi + 2 * np.pi, 2)
        assert abs(a - b) < 1e-9 * max(1.0, abs(a))
        assert abs(np.exp(1j * (psi + 2 * np.pi)) - np.exp(1j * psi)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ALL_SPECS), st.integers(0, 2**32 - 1))
def test_root_count_property(lk, seed):
    spec = GroupSpec(*lk)
    p = from_orbit_point(spec, oracles.ytilde(*lk, random_xpoint(spec, np.random.default_rng(seed)).x))
    try:
        crit = critical_points(p)
    except DegenerateCritical:
        return
    assert len(crit) == spec.l + 2 and crit.residual < 1e-12


# -- angle chart ------------------------------------------------------------

@pytest.mark.parametrize("l,k", ALL_SPECS)
def test_factorization_round_trip(l, k):
    spec = GroupSpec(l, k)
    x, chart, p, _ = sample(spec, 17)
    assert chart.mismatch < 1e-10
    Z = chart.nodes
    zeros = np.roots(p.numerator.coeffs)
    for z in Z[:l + 1]:
        assert np.min(np.abs(zeros - z)) < 1e-8
    assert abs(Z[l + 1] - p.pole) < 1e-12
    assert abs(abs(p.pole) - abs(np.exp(2j * np.pi * x.x[l]))) < 1e-12


def test_factorize_rejects_origin():
    with pytest.raises(DegenerateCritical):
        factorize_phi(np.zeros(4, dtype=complex), GroupSpec(2, 1))


def test_diag_identity_closed_form_values():
    spec = GroupSpec(3, 2)
    E = diag_identity_expected(spec)
    n = spec.l + 2
    assert E[n - 1, n - 1] == -1 - 1 / 2
    assert E[0, 1] == -1 / 2 and E[0, n - 1] == -1 / 2
    assert E[1, 1] == 1 - 1 / 2


@pytest.mark.parametrize("l,k", [(3, 2), (2, 1), (4, 3)])
def test_diag_identity_identity(l, k):
    spec = GroupSpec(l, k)
    _, chart, p, crit = sample(spec, 23)
    assert diag_identity_check(p, crit, spec, chart) < 1e-9


def test_varpi_closed_values():
    spec = GroupSpec(3, 1)
    V = varpi_expected(spec) * 4 * np.pi ** 2
    l = spec.l
    assert V[l, l + 1] == 1
    assert V[l, l] == -(1 + 1) / 1
    assert V[l + 1, l + 1] == -(2 + 1) / 2
    assert np.allclose(V[:l, l:], 0)
    assert abs(V[0, 0] - (1 - 1 / 4)) < 1e-15 and abs(V[0, 1] + 1 / 4) < 1e-15


@pytest.mark.parametrize("l,k", EXAMPLE_SPECS)
def test_varpi_pairings(l, k):
    spec = GroupSpec(l, k)
    _, chart, _, crit = sample(spec, 31)
    assert np.max(np.abs(varpi_pairings(spec, crit, chart) - varpi_expected(spec))) < 1e-9


# -- residue metrics and multiplication -------------------------------------

@pytest.mark.parametrize("l,k", EXAMPLE_SPECS + [(5, 2)])
def test_quadrature_matches_diagonal_formulas(l, k):
    _, _, p, crit = sample(GroupSpec(l, k), 41)
    rm = residue_metrics(p, crit)
    assert rm.quadrature_err < 1e-8


@pytest.mark.parametrize("l,k", EXAMPLE_SPECS)
def test_shift_derivative(l, k):
    _, _, p, crit = sample(GroupSpec(l, k), 43)
    assert shift_derivative_error(p, crit) < 1e-6


@pytest.mark.parametrize("l,k", [(2, 1), (3, 1), (3, 2), (4, 2), (5, 3)])
def test_multiplication_associative_with_unity(l, k):
    _, _, p, crit = sample(GroupSpec(l, k), 47)
    rm = residue_metrics(p, crit)
    C = residue_multiplication(p, crit, rm)
    assert associativity_error(C) < 1e-7
    assert unity_error(C, unity_vector(p)) < 1e-7


@pytest.mark.parametrize("l,k", [(2, 1), (3, 2), (4, 3), (4, 2)])
def test_literal_sign_breaks_unity_for_odd_k(l, k):
    _, _, p, crit = sample(GroupSpec(l, k), 53)
    rm = residue_metrics(p, crit)
    C = residue_multiplication(p, crit, rm, sign=(-1) ** (k + 1))
    err = unity_error(C, unity_vector(p))
    if k % 2:
        assert err > 0.5
    else:
        assert err < 1e-7


@pytest.mark.parametrize("l,k", ALL_SPECS)
def test_euler_consistency(l, k):
    assert euler_consistency(GroupSpec(l, k)) == []


def test_main_comparison_a2k1():
    rep = lg_metric_check(GroupSpec(2, 1), seed=42, samples=6)
    assert rep.passed and rep.rejection_rate == 0
    assert all(r.roots == 4 for r in rep.accepted)
    d = rep.records[0].as_dict()
    assert d["sample"] == 0 and d["rejected"] is False and "pullback_g" in d["max_rel_err"]


def test_main_comparison_rejects_empty():
    with pytest.raises(ValueError):
        lg_metric_check(GroupSpec(2, 1), samples=0)


def test_quadrature_circle_avoids_zeros_of_lambda():
    """A critical point close to two zeros of lambda (found by a wide seed survey)."""
    from wfrob.lg import quadrature_radii

    spec = GroupSpec(2, 1)
    x = random_xpoint(spec, np.random.default_rng([2024, 20]))
    p = factorize_phi(x, spec, seed=20).point
    crit = critical_points(p)
    zeros = np.roots(p.numerator.coeffs)
    for z, r in zip(crit.U, quadrature_radii(p, crit)):
        assert np.min(np.abs(zeros - z)) > r
    assert residue_metrics(p, crit).quadrature_err < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ALL_SPECS), st.integers(0, 2**32 - 1))
def test_quadrature_property(lk, seed):
    spec = GroupSpec(*lk)
    p = from_orbit_point(spec, oracles.ytilde(*lk, random_xpoint(spec, np.random.default_rng(seed)).x))
    try:
        crit = critical_points(p)
        rm = residue_metrics(p, crit)
    except (DegenerateCritical, JacobianSingular):
        return
    assert rm.quadrature_err < 1e-8
