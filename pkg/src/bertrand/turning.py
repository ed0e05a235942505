"""Circular orbits, turning points of the Clairaut motion and the
near-circular apsidal angle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EnergyBelowMinimum,
    NoCircularOrbit,
    NumericalFailure,
    UnboundedOrbit,
    UnstableCircularOrbit,
)
from .potentials import (
    Family,
    PotentialSpec,
    RadialProblem,
    clairaut_excess,
    clairaut_potential,
    clairaut_slope,
    eval_potential,
    _u_derivative,
)

#: Relative width of the window in which E is treated as exactly V_R.
DEGENERATE_WINDOW = 1e-12

_BISECTION_WIDTH = 1e-14
_MAX_EXPANSIONS = 1100


@dataclass(frozen=True)
class TurningPair:
    """Clairaut turning points ``x_lt <= x0 <= x_gt`` at energy ``E``.

    ``r_min = L/(m x_gt)`` and ``r_max = L/(m x_lt)`` are the pericentre and
    apocentre radii.
    """

    x_lt: float
    x_gt: float
    E: float
    r_min: float
    r_max: float
    iterations: int = 0
    residual: float = 0.0

    @property
    def delta_x(self) -> float:
        return self.x_gt - self.x_lt


def circular_radius(spec: PotentialSpec, m: float = 1.0, L: float = 1.0) -> float:
    """Radius ``R`` solving ``L**2/m = R**3 U'(R)``."""
    fam = spec.family
    if fam is Family.POWER_LAW_POSITIVE:
        return (L * L / (spec.nu * spec.k * m)) ** (1.0 / (spec.nu + 2.0))
    if fam is Family.POWER_LAW_ATTRACTIVE:
        return (L * L / (spec.nu * spec.k * m)) ** (1.0 / (2.0 - spec.nu))
    if fam is Family.LOGARITHMIC:
        return L / math.sqrt(spec.k * m)
    return _tabulated_circular_radius(spec, m, L)


def _tabulated_circular_radius(spec, m, L):
    target = L * L / m

    def f(r):
        return r**3 * _u_derivative(spec, np.asarray(r, dtype=float), 1) - target

    radii = spec.radii
    vals = f(radii)
    crossings = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if crossings.size == 0:
        raise NoCircularOrbit("no sign change of r^3 U'(r) - L^2/m in the tabulated range")
    if crossings.size > 1:
        raise NoCircularOrbit("several circular orbits; multi-well potentials are not supported")
    i = crossings[0]
    lo, hi = radii[i], radii[i + 1]
    flo = vals[i]
    while hi - lo > _BISECTION_WIDTH * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        fmid = float(f(mid))
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def circular_apsidal(spec: PotentialSpec, R: float) -> float:
    """Limit apsidal angle ``pi sqrt(U'(R) / (R U''(R) + 3 U'(R)))``."""
    u1 = eval_potential(spec, R, 1)
    u2 = eval_potential(spec, R, 2)
    denom = R * u2 + 3 * u1
    if u1 <= 0 or denom <= 0:
        raise UnstableCircularOrbit(f"no stable circular orbit at R={R}")
    return math.pi * math.sqrt(u1 / denom)


def curvature(problem: RadialProblem):
    """Return ``(omega**2, W''(x0))`` for small oscillations about ``x0``."""
    w2 = clairaut_potential(problem, problem.x0, 2)
    if w2 <= 0:
        raise UnstableCircularOrbit(f"W''(x0) = {w2} is not positive")
    return w2 / problem.m, w2


def _branch(problem: RadialProblem, excess, side: int):
    """Vectorized root of ``W(x) - V_R = excess`` on one side of ``x0``.

    Geometric bracketing by factors of two, bisection, one Newton polish.
    Returns ``(x, iterations)``.
    """
    excess = np.atleast_1d(np.asarray(excess, dtype=float))
    x0 = problem.x0
    factor = 2.0 if side > 0 else 0.5
    inner = np.full_like(excess, x0)
    outer = np.full_like(excess, x0 * factor)
    for count in range(_MAX_EXPANSIONS):
        done = clairaut_excess(problem, outer) >= excess
        if done.all():
            break
        inner = np.where(done, inner, outer)
        outer = np.where(done, outer, outer * factor)
    else:
        raise UnboundedOrbit("could not bracket a turning point")
    iterations = count
    # invariant: excess(inner) < target <= excess(outer)
    for _ in range(200):
        mid = 0.5 * (inner + outer)
        width = np.abs(outer - inner)
        tol = np.maximum(_BISECTION_WIDTH * np.minimum(1.0, np.abs(mid)), 4 * np.spacing(np.abs(mid)))
        if np.all(width <= tol):
            break
        below = clairaut_excess(problem, mid) < excess
        inner = np.where(below, mid, inner)
        outer = np.where(below, outer, mid)
        iterations += 1
    else:
        raise NumericalFailure("bisection did not converge")
    x = 0.5 * (inner + outer)
    resid = clairaut_excess(problem, x) - excess
    slope = clairaut_slope(problem, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = x - resid / slope
    lo = np.minimum(inner, outer)
    hi = np.maximum(inner, outer)
    ok = np.isfinite(polished) & (polished >= lo) & (polished <= hi)
    if ok.any():
        new_resid = clairaut_excess(problem, np.where(ok, polished, x)) - excess
        better = ok & (np.abs(new_resid) < np.abs(resid))
        x = np.where(better, polished, x)
    return x, iterations + 1


def _check_energy(problem: RadialProblem, E: float) -> float:
    excess = E - problem.V_R
    if excess < 0:
        raise EnergyBelowMinimum(f"E={E!r} is below the effective minimum V_R={problem.V_R!r}")
    if E >= problem.escape_energy:
        raise UnboundedOrbit(f"E={E!r} >= {problem.escape_energy!r}: orbit is unbounded")
    return excess


def is_degenerate(problem: RadialProblem, excess: float, window: float = DEGENERATE_WINDOW) -> bool:
    return excess <= window * max(1.0, abs(problem.V_R))


def turning_pair_from_excess(problem: RadialProblem, excess: float, E: float | None = None) -> TurningPair:
    """Turning points for ``E = V_R + excess`` (``excess >= 0``)."""
    if E is None:
        E = problem.V_R + excess
    c = problem.scale
    if is_degenerate(problem, excess):
        x0 = problem.x0
        return TurningPair(x0, x0, E, problem.R, problem.R)
    x_lt, it_lt = _branch(problem, excess, -1)
    x_gt, it_gt = _branch(problem, excess, +1)
    x_lt, x_gt = float(x_lt[0]), float(x_gt[0])
    resid = max(
        abs(clairaut_potential(problem, x_lt) - E),
        abs(clairaut_potential(problem, x_gt) - E),
    )
    return TurningPair(x_lt, x_gt, E, c / x_gt, c / x_lt, max(it_lt, it_gt), resid)


def turning_points(problem: RadialProblem, E: float) -> TurningPair:
    """Solve ``W(x) = E`` on both sides of ``x0``.

    Raises :class:`EnergyBelowMinimum` for ``E < V_R`` and
    :class:`UnboundedOrbit` for attractive power laws with ``E >= B``.
    """
    excess = _check_energy(problem, E)
    return turning_pair_from_excess(problem, excess, E)


def turning_arrays(problem: RadialProblem, excess, window: float = DEGENERATE_WINDOW):
    """Vectorized ``(x_lt, x_gt)`` for an array of energy excesses over ``V_R``.

    Excesses within ``window * max(1, |V_R|)`` collapse onto ``x0``.
    """
    excess = np.asarray(excess, dtype=float)
    x_lt = np.full(excess.shape, problem.x0)
    x_gt = np.full(excess.shape, problem.x0)
    live = excess > window * max(1.0, abs(problem.V_R))
    if live.any():
        x_lt[live] = _branch(problem, excess[live], -1)[0]
        x_gt[live] = _branch(problem, excess[live], +1)[0]
    return x_lt, x_gt
