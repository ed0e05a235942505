import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bertrand.apsidal import apsidal_angle
from bertrand.errors import DomainError, EnergyBelowMinimum, RegularityViolation
from bertrand.fractional import (
    EnergyFunction,
    Regularity,
    constant,
    invert_period,
    semi_derivative,
    semi_integral,
    symmetric_branches,
)
from bertrand.isochrony import alpha
from bertrand.potentials import RadialProblem, hooke, kepler, power_law
from bertrand.turning import turning_points

SQRT_PI = math.sqrt(math.pi)


def power(p, base=0.0, derivative=True):
    return EnergyFunction(
        lambda w: np.abs(w - base) ** p,
        base,
        Regularity.VANISHES_AT_BASE,
        derivative=(lambda w: p * np.abs(w - base) ** (p - 1)) if derivative else None,
    )


@pytest.mark.parametrize("derivative", [True, False])
@pytest.mark.parametrize(
    "p, base, E, expected",
    [
        (1.0, -0.5, 0.5, 2 / SQRT_PI),
        (1.5, 0.0, 1.0, 3 * SQRT_PI / 4),
        (2.0, 1.0, 3.0, 2 * math.gamma(3) / math.gamma(2.5) * 2**1.5 / 2),
    ],
)
def test_semi_derivative_examples(p, base, E, expected, derivative):
    # D^{1/2} (w - base)**p = Gamma(p + 1) / Gamma(p + 1/2) (E - base)**(p - 1/2)
    closed = math.gamma(p + 1) / math.gamma(p + 0.5) * (E - base) ** (p - 0.5)
    assert closed == pytest.approx(expected, rel=1e-12)
    tol = 1e-10 if derivative else 1e-8
    assert semi_derivative(power(p, base, derivative), E) == pytest.approx(expected, abs=tol)


def test_semi_derivative_of_zero():
    zero = EnergyFunction(lambda w: 0 * w, 0.0, Regularity.VANISHES_AT_BASE)
    assert semi_derivative(zero, 2.0) == 0.0


def test_semi_derivative_requires_vanishing():
    with pytest.raises(RegularityViolation):
        semi_derivative(constant(1.0, 0.0), 1.0)
    lying = EnergyFunction(lambda w: 1 + w, 0.0, Regularity.VANISHES_AT_BASE)
    with pytest.raises(RegularityViolation):
        semi_derivative(lying, 1.0)


@pytest.mark.parametrize(
    "g, E, expected",
    [
        (constant(1.0, 0.0), 1.0, 2 / SQRT_PI),
        (EnergyFunction(lambda w: np.sqrt(w), 0.0), 1.0, SQRT_PI / 2),
        (constant(0.0, 0.0), 1.0, 0.0),
    ],
)
def test_semi_integral_examples(g, E, expected):
    assert semi_integral(g, E) == pytest.approx(expected, abs=1e-10)


def test_semi_integral_domain():
    with pytest.raises(DomainError):
        semi_integral(constant(1.0, 0.0), -1.0)
    assert semi_integral(constant(1.0, 0.0), 0.0) == 0.0


def test_non_finite_values_rejected():
    bad = EnergyFunction(lambda w: np.where(w > 0.5, np.nan, 1.0), 0.0)
    with pytest.raises(RegularityViolation):
        semi_integral(bad, 1.0)


def test_scalar_only_callable():
    g = EnergyFunction(lambda w: math.sqrt(w), 0.0)
    assert semi_integral(g, 1.0) == pytest.approx(SQRT_PI / 2, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(
    c=st.lists(st.floats(-3, 3), min_size=3, max_size=3),
    E=st.floats(0.05, 5.0),
)
def test_linearity(c, E):
    ps = (1.0, 1.5, 2.0)
    basis = [power(p) for p in ps]
    combo = EnergyFunction(
        lambda w: sum(ci * g(w) for ci, g in zip(c, basis)),
        0.0,
        Regularity.VANISHES_AT_BASE,
        derivative=lambda w: sum(ci * g.derivative(w) for ci, g in zip(c, basis)),
    )
    for op in (semi_integral, semi_derivative):
        parts = sum(ci * op(g, E) for ci, g in zip(c, basis))
        assert op(combo, E) == pytest.approx(parts, abs=1e-9)


@settings(max_examples=30)
@given(c=st.floats(-10, 10), base=st.floats(-5, 5), span=st.floats(1e-6, 10))
def test_constant_homogeneity(c, base, span):
    got = semi_integral(constant(c, base), base + span)
    assert got == pytest.approx(c * 2 / SQRT_PI * math.sqrt(span), rel=1e-10, abs=1e-12)


def test_invert_period_kepler(kepler_problem):
    assert invert_period(math.pi, kepler_problem, -3 / 8) == pytest.approx(1.0, abs=1e-6)
    assert invert_period(math.pi, kepler_problem, -0.5) == 0.0
    with pytest.raises(EnergyBelowMinimum):
        invert_period(math.pi, kepler_problem, -0.7)


@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_invert_constant_law(m):
    prob = RadialProblem(power_law(0.8, attractive=True), m=m)
    phi_c = 2.3
    for gap in (1e-3, 0.1, 0.3):
        E = prob.V_R + gap
        assert invert_period(phi_c, prob, E) == pytest.approx(alpha(prob, phi_c) * math.sqrt(gap), rel=1e-10)


@pytest.mark.parametrize("prob", [RadialProblem(kepler()), RadialProblem(hooke())])
def test_round_trip_with_dynamics(prob):
    def law(w):
        return np.array([apsidal_angle(prob, float(v)).phi if v > prob.V_R else math.pi for v in np.ravel(w)])

    phi = EnergyFunction(law, prob.V_R)
    top = 0.95 * abs(prob.V_R) if prob.is_attractive else 5.0
    for E in prob.V_R + top * np.linspace(0.05, 1.0, 20):
        width = invert_period(phi, prob, E)
        assert width == pytest.approx(turning_points(prob, E).delta_x, abs=1e-6)


def test_period_law_must_share_base(kepler_problem):
    with pytest.raises(DomainError):
        invert_period(constant(math.pi, 0.0), kepler_problem, -0.3)


def test_symmetric_branches_kepler(kepler_problem):
    pair = symmetric_branches(math.pi, kepler_problem, -3 / 8)
    assert_allclose((pair.x_lt, pair.x_gt), (0.5, 1.5), atol=1e-9)
    pair = symmetric_branches(math.pi, kepler_problem, -0.5)
    assert (pair.x_lt, pair.x_gt) == (1.0, 1.0)


def test_symmetric_branches_hooke_non_uniqueness(hooke_problem):
    prob = hooke_problem
    E = prob.V_R + 0.1
    sym = symmetric_branches(math.pi / 2, prob, E)
    true = turning_points(prob, E)
    # same width, different placement: the inversion fixes only the width
    assert sym.delta_x == pytest.approx(true.delta_x, rel=1e-8)
    assert sym.x_gt + sym.x_lt == pytest.approx(2 * prob.x0)
    assert abs(sym.x_lt - true.x_lt) > 1e-4
