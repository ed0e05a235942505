import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bertrand.errors import EnergyBelowMinimum, NoCircularOrbit, UnboundedOrbit, UnstableCircularOrbit
from bertrand.potentials import RadialProblem, clairaut_potential, hooke, kepler, logarithmic, power_law, tabulated
from bertrand.turning import (
    circular_apsidal,
    circular_radius,
    curvature,
    turning_arrays,
    turning_points,
)


@pytest.mark.parametrize(
    "spec, m, L, R",
    [(kepler(), 1, 1, 1.0), (hooke(), 1, 1, 2 ** -0.25), (kepler(), 1, 2, 4.0), (logarithmic(4.0), 1, 2, 1.0)],
)
def test_circular_radius(spec, m, L, R):
    got = circular_radius(spec, m, L)
    assert got == pytest.approx(R, rel=1e-15)


@pytest.mark.parametrize("spec", [kepler(), hooke(), power_law(0.3, 2.0, attractive=True), power_law(7.0)])
def test_circular_radius_condition(spec):
    for m, L in [(1, 1), (2.5, 0.3), (0.2, 4.0)]:
        R = circular_radius(spec, m, L)
        u1 = spec.k * spec.nu * R ** (spec.nu - 1) if spec.clairaut_exponent < 0 else spec.k * spec.nu * R ** (-spec.nu - 1)
        assert abs(L * L / m - R**3 * u1) <= 1e-12 * L * L / m


def test_tabulated_circular_radius_errors():
    r = np.linspace(1.0, 2.0, 20)
    with pytest.raises(NoCircularOrbit):
        circular_radius(tabulated(r, -1 / r), 1.0, 5.0)


def test_turning_points_kepler(kepler_problem):
    pair = turning_points(kepler_problem, -3 / 8)
    assert (pair.x_lt, pair.x_gt) == (pytest.approx(0.5, abs=1e-15), pytest.approx(1.5, abs=1e-15))
    assert pair.r_min == pytest.approx(2 / 3)
    assert pair.r_max == pytest.approx(2.0)
    assert pair.r_min + pair.r_max == pytest.approx(2 * 4 / 3)
    assert pair.delta_x == pytest.approx(1.0)


def test_turning_points_degenerate(kepler_problem):
    pair = turning_points(kepler_problem, -0.5)
    assert (pair.x_lt, pair.x_gt) == (1.0, 1.0)
    assert pair.delta_x == 0.0


def test_turning_points_errors(kepler_problem, hooke_problem):
    with pytest.raises(EnergyBelowMinimum):
        turning_points(kepler_problem, -0.6)
    with pytest.raises(UnboundedOrbit):
        turning_points(kepler_problem, 0.0)
    # no escape threshold for a confining potential
    assert turning_points(hooke_problem, 1e6).x_gt > 0


PROBLEMS = [
    RadialProblem(kepler()),
    RadialProblem(hooke(), m=2.0, L=0.5),
    RadialProblem(power_law(0.5, attractive=True)),
    RadialProblem(power_law(1.8, attractive=True), L=3.0),
    RadialProblem(logarithmic(2.0)),
    RadialProblem(power_law(9.0)),
]


@pytest.mark.parametrize("prob", PROBLEMS)
def test_turning_residuals(prob):
    top = abs(prob.V_R) if prob.is_attractive else 10 * abs(prob.V_R) + 1
    for frac in (1e-6, 1e-3, 0.2, 0.7, 0.999):
        E = prob.V_R + frac * top
        pair = turning_points(prob, E)
        assert 0 < pair.x_lt <= prob.x0 <= pair.x_gt
        for x in (pair.x_lt, pair.x_gt):
            assert abs(clairaut_potential(prob, x) - E) <= 1e-12 * max(1.0, abs(E))


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(0.1, 1.9), a=st.floats(1e-6, 0.999), b=st.floats(1e-6, 0.999))
def test_monotone_widening(nu, a, b):
    prob = RadialProblem(power_law(nu, attractive=True))
    lo, hi = sorted((a, b))
    p1 = turning_points(prob, prob.V_R * (1 - lo))
    p2 = turning_points(prob, prob.V_R * (1 - hi))
    assert p2.x_lt <= p1.x_lt
    assert p1.x_gt <= p2.x_gt


def test_turning_arrays_match_scalar():
    prob = PROBLEMS[2]
    offsets = np.array([0.0, 1e-14, 1e-4, 0.1, 0.5])
    x_lt, x_gt = turning_arrays(prob, offsets)
    assert x_lt[0] == x_gt[0] == prob.x0
    for off, lo, hi in zip(offsets[2:], x_lt[2:], x_gt[2:]):
        pair = turning_points(prob, prob.V_R + off)
        assert_allclose((lo, hi), (pair.x_lt, pair.x_gt), rtol=1e-13)


@pytest.mark.parametrize(
    "spec, expected",
    [(kepler(), math.pi), (hooke(), math.pi / 2), (logarithmic(), math.pi / math.sqrt(2))],
)
def test_circular_apsidal(spec, expected):
    for L in (0.5, 1.0, 2.0):
        R = circular_radius(spec, 1.0, L)
        assert circular_apsidal(spec, R) == pytest.approx(expected, rel=1e-12)


def test_circular_apsidal_unstable():
    r = np.linspace(0.5, 2, 50)
    # U = -1/r**3 has R U'' + 3 U' = 0
    with pytest.raises(UnstableCircularOrbit):
        circular_apsidal(tabulated(r, -(r**-3.0)), 1.0)


@pytest.mark.parametrize("nu", [0.25, 1.0, 1.75])
@pytest.mark.parametrize("attractive", [True, False])
def test_curvature_power_law(nu, attractive):
    sign = -1 if attractive else 1
    for m, L in [(1.0, 1.0), (3.0, 0.4)]:
        prob = RadialProblem(power_law(nu, attractive=attractive), m, L)
        omega2, w2 = curvature(prob)
        assert w2 == pytest.approx(m * (2 + sign * nu), rel=1e-13)
        assert omega2 == pytest.approx(2 + sign * nu, rel=1e-13)
        assert circular_apsidal(prob.potential, prob.R) == pytest.approx(math.pi / math.sqrt(omega2), rel=1e-10)


def test_curvature_examples(kepler_problem, hooke_problem):
    assert_allclose(curvature(kepler_problem), (1.0, 1.0))
    assert_allclose(curvature(hooke_problem), (4.0, 4.0))
