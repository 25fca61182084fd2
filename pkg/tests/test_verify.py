from fractions import Fraction

import numpy as np
import pytest

from _shared import SMALL_SPECS, frob
from wfrob.algebra import LaurentPoly, parse_poly
from wfrob.cli import corrupt_potential
from wfrob.frobenius import Potential, covariant_constant, cubic_skeleton, euler_weights
from wfrob.orbit import ChartTensor, GroupSpec, as_tuple_matrix, chart_table
from wfrob.verify import (
    exact_suite, intersection_check, pencil_flatness_numeric, unity_and_euler_check, wdvv_check,
)

F = Fraction


def by_name(report):
    return {c.name: c for c in report.checks}


@pytest.mark.parametrize("l,k", SMALL_SPECS)
def test_exact_suite_passes(l, k):
    rep = exact_suite(frob(l, k))
    failing = [c.name for c in rep.checks if not c.passed]
    assert failing == []
    assert all(c.residual == 0 for c in rep.checks if c.exact)


def test_wdvv_printed_potential():
    spec = GroupSpec(2, 1)
    tt = chart_table(spec, "t")
    F21 = Potential(spec, parse_poly(
        "1/2*t1^2*t4 + t1*t2*t3 + 1/2*t2^2*t3 + E1*E2 - t2*E1 + t2*E2", tt))
    rep = by_name(wdvv_check(spec, F21, frob(2, 1).eta_t))
    assert rep["wdvv_exact"].passed and rep["wdvv_numeric"].passed


@pytest.mark.parametrize("l,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_wdvv_corrupted_fails(l, k):
    fd = frob(l, k)
    rep = by_name(wdvv_check(fd.spec, corrupt_potential(fd.potential), fd.eta_t))
    assert not rep["wdvv_exact"].passed and rep["wdvv_exact"].residual > 0
    assert not rep["wdvv_numeric"].passed
    assert "offending quadruple" in rep["wdvv_exact"].detail


@pytest.mark.parametrize("l,k", SMALL_SPECS)
def test_wdvv_skeleton_only(l, k):
    fd = frob(l, k)
    skel = cubic_skeleton(fd.spec, covariant_constant(fd.eta_t))
    pot = Potential(fd.spec, skel, log_coeff=F(0))
    assert wdvv_check(fd.spec, pot, fd.eta_t).passed


@pytest.mark.parametrize("l,k", SMALL_SPECS)
def test_intersection_entries(l, k):
    fd = frob(l, k)
    tt = fd.g_t.table
    assert fd.g_t[l + 1, l + 1] == LaurentPoly.constant(tt, F(l, k * (l - k)))
    assert fd.g_t[l, l] == LaurentPoly.constant(tt, F(l - k + 1, l - k))
    assert fd.g_t[l, l + 1] == LaurentPoly.constant(tt, F(1, l - k))
    assert intersection_check(fd.spec, fd.potential, fd.eta_t, fd.g_t).passed


def test_intersection_detects_corruption():
    fd = frob(3, 1)
    rep = intersection_check(fd.spec, corrupt_potential(fd.potential), fd.eta_t, fd.g_t)
    assert not rep.passed and rep.checks[0].detail


@pytest.mark.parametrize("l,k", [(2, 1), (3, 2)])
def test_pencil_flat(l, k):
    o = frob(l, k).orbit
    rep = pencil_flatness_numeric(o.spec if hasattr(o, "spec") else GroupSpec(l, k), o.g, o.eta,
                                  seed=11, lambdas=(0, 1), points=3)
    assert rep.passed, [(c.name, c.residual) for c in rep.checks]


def test_pencil_constant_metric():
    spec = GroupSpec(2, 1)
    yt = chart_table(spec, "y")
    const = [[F(2), F(1), F(0), F(0)], [F(1), F(2), F(0), F(0)],
             [F(0), F(0), F(0), F(1)], [F(0), F(0), F(1), F(3)]]
    unit = [[F(int(i == j)) for j in range(4)] for i in range(4)]
    g = ChartTensor("y", yt, as_tuple_matrix([[LaurentPoly.constant(yt, c) for c in r] for r in const]))
    eta = ChartTensor("y", yt, as_tuple_matrix([[LaurentPoly.constant(yt, c) for c in r] for r in unit]))
    rep = pencil_flatness_numeric(spec, g, eta, seed=0, lambdas=(0, 1), points=2)
    assert max(c.residual for c in rep.checks) < 1e-12


def test_pencil_detects_curved_metric():
    o = frob(2, 1).orbit
    yt = o.g.table
    bumped = [[o.g[i, j] for j in range(4)] for i in range(4)]
    bumped[0][0] = bumped[0][0] + parse_poly("y1^2", yt)
    g = ChartTensor("y", yt, as_tuple_matrix(bumped))
    rep = pencil_flatness_numeric(GroupSpec(2, 1), g, o.eta, seed=11, lambdas=(0,), points=3)
    assert not rep.passed


@pytest.mark.parametrize("l,k", [(2, 1), (3, 1), (4, 3)])
def test_unity_euler(l, k):
    fd = frob(l, k)
    rep = by_name(unity_and_euler_check(fd.spec, fd.potential, fd.eta_t))
    assert all(c.passed for c in rep.values())


@pytest.mark.parametrize("l,k", [(2, 1), (3, 2)])
def test_wrong_unity_degree_fails(l, k):
    fd = frob(l, k)
    w = euler_weights(fd.spec)
    w[k - 1] = F(1, 2)
    rep = by_name(unity_and_euler_check(fd.spec, fd.potential, fd.eta_t, w))
    assert not rep["euler_bracket"].passed
    assert not rep["quasi_homogeneity"].passed


def test_reports_deterministic():
    a = [c.as_dict() for c in exact_suite(frob(3, 1)).sorted().checks]
    b = [c.as_dict() for c in exact_suite(frob(3, 1)).sorted().checks]
    assert a == b
    p1 = pencil_flatness_numeric(GroupSpec(2, 1), frob(2, 1).orbit.g, frob(2, 1).orbit.eta, seed=4, points=2)
    p2 = pencil_flatness_numeric(GroupSpec(2, 1), frob(2, 1).orbit.g, frob(2, 1).orbit.eta, seed=4, points=2)
    assert [c.as_dict() for c in p1.checks] == [c.as_dict() for c in p2.checks]
