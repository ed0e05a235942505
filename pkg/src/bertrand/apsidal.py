"""Apsidal angle and radial half-period by singular quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from ._quadrature import endpoint_singular, graded_singular
from .errors import EnergyBelowMinimum, ToleranceNotMet, UnboundedOrbit
from .fractional import EnergyFunction, Regularity, semi_derivative
from .potentials import RadialProblem, clairaut_slope, clairaut_step, effective_potential
from .turning import _check_energy, circular_apsidal, turning_arrays, turning_pair_from_excess

#: Below ``NEAR_CIRCULAR_WINDOW * max(1, |V_R|)`` above the minimum the
#: limit angle is returned instead of a quadrature.
NEAR_CIRCULAR_WINDOW = 1e-9


@dataclass(frozen=True)
class ApsidalResult:
    phi: float
    E: float
    L: float
    quad_order: int
    err_est: float


def _window(problem):
    return NEAR_CIRCULAR_WINDOW * max(1.0, abs(problem.V_R))


def _gap(problem, a, b, left, right, slope_a, slope_b):
    """``E - W`` at ``a + left == b - right``, measured from the nearer
    turning point so that nodes closer than ``ulp(x)`` keep their digits."""
    near_a = left <= right
    gap = -np.where(
        near_a,
        clairaut_step(problem, a, np.where(near_a, left, 0.0)),
        clairaut_step(problem, b, np.where(near_a, 0.0, -right)),
    )
    bad = gap <= 0
    if np.any(bad):
        gap = np.where(bad, np.where(near_a, slope_a * left, slope_b * right), gap)
    return gap


def _well_integrand(problem, excess, a, b):
    slope_a = abs(clairaut_slope(problem, a))
    slope_b = abs(clairaut_slope(problem, b))

    def f(x, left, right):
        return 1.0 / np.sqrt(_gap(problem, a, b, left, right, slope_a, slope_b))

    return f


# W is not analytic at x = 0, so when the inner turning point sits much
# closer to 0 than to the outer one the integrand varies on the scale x_lt
_GRADING_RATIO = 0.05


def _grading(a, b):
    breaks = []
    p = 4.0 * a
    while p < _GRADING_RATIO * b:
        breaks.append(p)
        p *= 4.0
    if breaks:
        breaks.append(0.5 * (breaks[-1] + b))
    return breaks


def _phi_quadrature(problem, excess, tol):
    pair = turning_pair_from_excess(problem, excess)
    scale = math.sqrt(problem.m / 2.0)
    a, b = pair.x_lt, pair.x_gt
    f = _well_integrand(problem, excess, a, b)
    breaks = _grading(a, b)
    if breaks:
        val, err, n = graded_singular(f, a, b, breaks, tol / scale)
    else:
        val, err, n = endpoint_singular(f, a, b, tol / scale)
    return scale * val, scale * err, n


def phi_from_excess(problem: RadialProblem, excess: float, tol: float = 1e-10) -> ApsidalResult:
    """Apsidal angle at ``E = V_R + excess``; see :func:`apsidal_angle`."""
    E = problem.V_R + excess
    window = _window(problem)
    if excess < window:
        phi_c = circular_apsidal(problem.potential, problem.R)
        probe, _, n = _phi_quadrature(problem, 2 * window, tol)
        return ApsidalResult(phi_c, E, problem.L, n, abs(probe - phi_c))
    phi, err, n = _phi_quadrature(problem, excess, tol)
    return ApsidalResult(phi, E, problem.L, n, err)


def apsidal_angle(problem: RadialProblem, E: float, tol: float = 1e-10) -> ApsidalResult:
    """Apsidal angle ``sqrt(m/2) int_{x_lt}^{x_gt} dx / sqrt(E - W(x))``.

    Gauss-Legendre in ``theta`` after ``x = x_lt + (x_gt - x_lt) sin^2 theta``,
    doubling the order from 8 to 1024. Very close to the circular orbit the
    limit angle is returned, with ``err_est`` bounding its distance to the
    quadrature just outside that window.
    """
    excess = _check_energy(problem, E)
    return phi_from_excess(problem, excess, tol)


def _delta_x_function(problem: RadialProblem) -> EnergyFunction:
    def width(offset):
        x_lt, x_gt = turning_arrays(problem, offset)
        return x_gt - x_lt

    def slope(offset):
        # inverse-function rule on each branch; no degenerate window here,
        # the 1/sqrt(offset) growth is what the Abel kernel expects
        x_lt, x_gt = turning_arrays(problem, offset, window=0.0)
        return 1.0 / clairaut_slope(problem, x_gt) - 1.0 / clairaut_slope(problem, x_lt)

    return EnergyFunction(width, problem.V_R, Regularity.VANISHES_AT_BASE, slope, relative=True)


def apsidal_semiderivative(problem: RadialProblem, E: float, tol: float = 1e-10) -> float:
    """Apsidal angle as ``sqrt(m pi / 2) D^{1/2}[x_gt - x_lt](E)``.

    An independent route to :func:`apsidal_angle`: the integral runs over the
    energy instead of the Clairaut variable.
    """
    excess = _check_energy(problem, E)
    if excess < _window(problem):
        return circular_apsidal(problem.potential, problem.R)
    scale = math.sqrt(problem.m * math.pi / 2.0)
    return scale * semi_derivative(_delta_x_function(problem), E, tol / scale)


def _radial_integral(problem: RadialProblem, excess: float, E: float, weight, tol: float) -> float:
    """``sqrt(m/2) int_{r_min}^{r_max} weight(r) dr / sqrt(E - V_L(r))``."""
    pair = turning_pair_from_excess(problem, excess, E)
    c = problem.scale
    a, b = pair.r_min, pair.r_max
    x_gt, x_lt = pair.x_gt, pair.x_lt
    # |dV_L/dr| at the turning radii, through x = c / r
    slope_a = abs(clairaut_slope(problem, x_gt)) * x_gt**2 / c
    slope_b = abs(clairaut_slope(problem, x_lt)) * x_lt**2 / c

    def f(r, left, right):
        # steps in x = c / r away from the pericentre and apocentre
        step_a = -x_gt * left / (a + left)
        step_b = x_lt * right / (b - right)
        near_a = left <= right
        gap = -np.where(
            near_a,
            clairaut_step(problem, x_gt, np.where(near_a, step_a, 0.0)),
            clairaut_step(problem, x_lt, np.where(near_a, 0.0, step_b)),
        )
        bad = gap <= 0
        if np.any(bad):
            gap = np.where(bad, np.where(near_a, slope_a * left, slope_b * right), gap)
        return weight(r) / np.sqrt(gap)

    scale = math.sqrt(problem.m / 2.0)
    val, _, _ = endpoint_singular(f, a, b, tol / scale)
    return scale * val


def radial_half_period(problem: RadialProblem, E: float, tol: float = 1e-10) -> float:
    """Time from pericentre to apocentre,
    ``sqrt(m/2) int_{r_min}^{r_max} dr / sqrt(E - V_L(r))``."""
    excess = _check_energy(problem, E)
    if excess < _window(problem):
        return math.pi / math.sqrt(effective_potential(problem, problem.R, 2) / problem.m)
    return _radial_integral(problem, excess, E, lambda r: 1.0, tol)


def apsidal_angle_radial(problem: RadialProblem, E: float, tol: float = 1e-10) -> float:
    """Apsidal angle as an integral over the radius,
    ``sqrt(m/2) int (L/(m r**2)) dr / sqrt(E - V_L(r))``.

    The same quantity as :func:`apsidal_angle` before the change of variable
    ``x = L/(m r)``; used as a cross-check.
    """
    excess = _check_energy(problem, E)
    if excess < _window(problem):
        return circular_apsidal(problem.potential, problem.R)
    c = problem.scale
    return _radial_integral(problem, excess, E, lambda r: c / (r * r), tol)


@dataclass(frozen=True)
class SweepRow:
    L: float
    E: float
    phi: float
    err_est: float
    status: str


def apsidal_sweep(
    problem: RadialProblem,
    energies: Sequence[float] | Callable[[RadialProblem], Iterable[float]],
    L_values: Sequence[float],
    tol: float = 1e-10,
) -> list[SweepRow]:
    """Apsidal angle over an (L, E) grid, one row per cell in grid order.

    ``energies`` is either a fixed sequence or a callable mapping each
    per-L problem to its energies (useful because ``V_R`` depends on L).
    Failures are recorded in ``status`` instead of raised.
    """
    rows = []
    for L in L_values:
        prob = problem.with_L(L)
        grid = energies(prob) if callable(energies) else energies
        for E in grid:
            E = float(E)
            try:
                res = apsidal_angle(prob, E, tol)
            except EnergyBelowMinimum:
                rows.append(SweepRow(L, E, math.nan, math.nan, "below_min"))
            except UnboundedOrbit:
                rows.append(SweepRow(L, E, math.nan, math.nan, "unbounded"))
            except ToleranceNotMet:
                rows.append(SweepRow(L, E, math.nan, math.nan, "tol_fail"))
            else:
                rows.append(SweepRow(L, E, res.phi, res.err_est, "ok"))
    return rows


def auto_energies(problem: RadialProblem, n: int) -> np.ndarray:
    """``n`` energies geometrically spaced (in ``E - V_R``) strictly inside
    ``(V_R + window, E_max)``; ``E_max`` is the escape energy for attractive
    power laws and ``V_R + 10 |V_R|`` otherwise."""
    window = _window(problem)
    if problem.is_attractive:
        top = problem.escape_energy - problem.V_R
    else:
        top = 10.0 * abs(problem.V_R) or 10.0
    offsets = np.geomspace(window, top, n + 2)[1:-1]
    return problem.V_R + offsets
