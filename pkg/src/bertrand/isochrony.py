"""Isochrony tests for the Clairaut motion.

If every bounded orbit of a problem has the same apsidal angle ``Phi_C``,
the well ``W`` must satisfy the functional equation::

    W(x) = W(x + alpha sqrt(W(x) - V_R)),   alpha = sqrt(2/m) * 2 Phi_C / pi

for every ``x`` in ``(0, x0]``. This module evaluates that equation, its
closed-form ``x -> 0`` and ``x -> inf`` limits for power laws, the
perturbative constraints obtained by expanding it about ``x0``, and the
reconstruction of ``U(r)`` from a circular apsidal law ``Phi_C(r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from ._quadrature import _leggauss
from .errors import (
    DisplacedPointNonPositive,
    DomainError,
    InvalidGrid,
    ProbeOutOfDomain,
    ToleranceNotMet,
    UnsupportedDerivativeOrder,
)
from .potentials import (
    MAX_ANALYTIC_ORDER,
    RadialProblem,
    clairaut_excess,
    clairaut_potential,
    power_law,
)
from .turning import _branch, circular_apsidal, curvature

#: Probe points, as fractions of ``x0``, for the residual certificate.
PROBE_FRACTIONS = (1 / 8, 1 / 4, 1 / 2, 3 / 4, 15 / 16)

ACCEPT_THRESHOLD = 1e-10
REJECT_THRESHOLD = 1e-3
ROOT_XTOL = 1e-14


def alpha(problem: RadialProblem, phi_c: float) -> float:
    """Displacement coefficient ``sqrt(2/m) * 2 Phi_C / pi``."""
    return math.sqrt(2.0 / problem.m) * 2.0 * phi_c / math.pi


def isochrony_residual(problem: RadialProblem, phi_c: float, x: float) -> float:
    """``W(x + alpha sqrt(W(x) - V_R)) - W(x)`` for a probe ``0 < x <= x0``.

    Vanishes for every probe iff the apsidal angle is ``phi_c`` at all
    energies. Both values of ``W`` are taken relative to ``V_R`` so that
    probes near ``x0`` keep their digits.
    """
    x0 = problem.x0
    if not 0 < x <= x0 * (1 + 1e-15):
        raise ProbeOutOfDomain(f"probe x={x!r} must lie in (0, x0={x0!r}]")
    gap = clairaut_excess(problem, x)
    shifted = x + alpha(problem, phi_c) * math.sqrt(max(gap, 0.0))
    # x + positive shift from a positive x; kept as a guard
    if not shifted > 0:
        raise DisplacedPointNonPositive(f"displaced point {shifted!r} is not positive")
    return clairaut_excess(problem, shifted) - gap


def residual_sup(problem: RadialProblem, phi_c: float | None = None, probes=PROBE_FRACTIONS) -> float:
    """Largest ``|isochrony_residual|`` over ``probes * x0``."""
    if phi_c is None:
        phi_c = circular_apsidal(problem.potential, problem.R)
    return max(abs(isochrony_residual(problem, phi_c, f * problem.x0)) for f in probes)


def bertrand_transcendental(nu: float) -> float:
    """``(nu/4)**(-nu/2) - 2``: the ``x -> 0`` limit of the functional
    equation for ``U = -k r**(-nu)``. Roots at ``nu = 1`` and ``nu = 2``."""
    if not 0 < nu <= 2:
        raise DomainError(f"transcendental condition needs 0 < nu <= 2, got {nu!r}")
    return (nu / 4.0) ** (-nu / 2.0) - 2.0


def asymptotic_condition(nu: float) -> float:
    """``4/(2 + nu) - 1``: the ``x -> inf`` limit for ``U = k r**nu``."""
    if not nu > 0:
        raise DomainError(f"asymptotic condition needs nu > 0, got {nu!r}")
    return 4.0 / (2.0 + nu) - 1.0


def find_roots(f: Callable[[float], float], grid: Sequence[float], xtol: float = ROOT_XTOL) -> list[float]:
    """Roots of ``f`` bracketed by sign changes between neighbouring grid
    points, refined with Brent's method. Exact zeros on the grid count once."""
    grid = np.asarray(grid, dtype=float)
    vals = np.array([f(v) for v in grid])
    roots = []
    for i, v in enumerate(vals):
        if v == 0.0:
            roots.append(float(grid[i]))
        elif i + 1 < len(vals) and vals[i + 1] != 0.0 and (v > 0) != (vals[i + 1] > 0):
            roots.append(float(brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    return roots


def fourth_order_violation(problem: RadialProblem) -> float:
    """``W''''(x0) - (5/3) W'''(x0)**2 / W''(x0)``; zero when the first
    nontrivial perturbative constraint holds."""
    _, w2 = curvature(problem)
    w3 = clairaut_potential(problem, problem.x0, 3)
    w4 = clairaut_potential(problem, problem.x0, 4)
    return w4 - 5.0 / 3.0 * w3 * w3 / w2


@dataclass(frozen=True)
class IsochronyReport:
    nu: float
    family: str
    residual_sup: float
    transcendental_value: float
    constraint_violation: float
    verdict: str


@dataclass(frozen=True)
class ScanResult:
    reports: list[IsochronyReport]
    roots: list[float]
    #: True when the residual verdicts agree with the closed-form roots
    consistent: bool


_FAMILIES = ("attractive", "positive")


def _family_condition(family):
    if family == "attractive":
        return bertrand_transcendental
    if family == "positive":
        return asymptotic_condition
    raise DomainError(f"family must be one of {_FAMILIES}, got {family!r}")


def _verdict(sup, scale, accept, reject):
    if sup <= accept * scale:
        return "isochronous"
    if sup >= reject * scale:
        return "not_isochronous"
    return "inconclusive"


def bertrand_scan(
    family: str,
    nus: Sequence[float],
    probes=PROBE_FRACTIONS,
    accept: float = ACCEPT_THRESHOLD,
    reject: float = REJECT_THRESHOLD,
    k: float = 1.0,
    m: float = 1.0,
    L: float = 1.0,
) -> ScanResult:
    """Scan a power-law family over ``nus``.

    Each grid point gets the residual certificate (sup over ``probes``,
    with ``Phi_C`` the problem's own limit angle), the family's closed-form
    condition and the fourth-order constraint. The closed-form condition is
    then solved for its roots over the grid; for the attractive family only
    roots inside ``0 < nu < 2`` are admissible.
    """
    condition = _family_condition(family)
    attractive = family == "attractive"
    reports = []
    for nu in nus:
        nu = float(nu)
        problem = RadialProblem(power_law(nu, k, attractive=attractive), m, L)
        sup = residual_sup(problem, probes=probes)
        scale = abs(problem.V_R)
        reports.append(
            IsochronyReport(
                nu=nu,
                family=family,
                residual_sup=sup,
                transcendental_value=condition(nu),
                constraint_violation=abs(fourth_order_violation(problem)),
                verdict=_verdict(sup, scale, accept, reject),
            )
        )
    roots = find_roots(condition, [r.nu for r in reports])
    if attractive:
        roots = [r for r in roots if 0 < r < 2]
    return ScanResult(reports, roots, _consistent(reports, roots))


def _consistent(reports, roots, near=1e-9):
    # every accepted grid point must sit on a root, and every root that
    # coincides with a grid point must be accepted there
    for rep in reports:
        on_root = any(abs(rep.nu - r) <= near for r in roots)
        if (rep.verdict == "isochronous") != on_root:
            return False
    return True


def perturbative_coefficients(problem: RadialProblem, max_n: int = 3) -> np.ndarray:
    """``a_n = 2 W^(n+2)(x0) / ((n+2)! W''(x0))`` for ``n = 1..max_n``."""
    spec = problem.potential
    limit = MAX_ANALYTIC_ORDER - 2 if spec.family.analytic else 0
    if not 1 <= max_n <= limit:
        raise UnsupportedDerivativeOrder(f"perturbative coefficients available for 1 <= n <= {limit}")
    _, w2 = curvature(problem)
    x0 = problem.x0
    return np.array(
        [2.0 * clairaut_potential(problem, x0, n + 2) / (math.factorial(n + 2) * w2) for n in range(1, max_n + 1)]
    )


def gamma(problem: RadialProblem, phi_c: float) -> float:
    """``omega Phi_C / pi`` with ``omega**2 = W''(x0) / m``."""
    omega2, _ = curvature(problem)
    return math.sqrt(omega2) * phi_c / math.pi


@dataclass(frozen=True)
class LateralMap:
    exact: float
    series: float
    gamma: float


def lateral_map(problem: RadialProblem, phi_c: float, eps_minus: float) -> LateralMap:
    """Right displacement ``eps_+`` matching a left displacement ``eps_-``.

    ``exact`` solves ``W(x0 + eps_+) = W(x0 - eps_-)`` on the right branch;
    ``series`` is its fourth-order expansion in ``eps_-`` written with
    ``gamma = omega Phi_C / pi`` and the coefficients ``a_n``.
    """
    x0 = problem.x0
    if not 0 <= eps_minus < x0:
        raise ProbeOutOfDomain(f"eps_minus={eps_minus!r} must lie in [0, x0={x0!r})")
    g = gamma(problem, phi_c)
    if eps_minus == 0:
        return LateralMap(0.0, 0.0, g)
    a1, a2, a3 = perturbative_coefficients(problem, 3)
    e = eps_minus
    series = (
        e * (2 * g - 1)
        - e**2 * g * a1
        + e**3 * g * (a2 - a1**2 / 4)
        + e**4 * g * (-a3 + a1 * a2 / 2 - a1**3 / 8)
    )
    excess = clairaut_excess(problem, x0 - e)
    x_gt, _ = _branch(problem, excess, +1)
    return LateralMap(float(x_gt[0]) - x0, float(series), g)


@dataclass(frozen=True)
class Constraints:
    gamma_check: float
    a1_free: bool
    fourth_order_violation: float


def isochrony_constraints(problem: RadialProblem, phi_c: float | None = None) -> Constraints:
    """Perturbative constraints at ``x0``.

    At first order ``gamma = 1``; at second order ``a_1`` is left free; at
    third order ``a_2 = (5/4) a_1**2``, equivalent to a vanishing
    :func:`fourth_order_violation`.
    """
    if phi_c is None:
        phi_c = circular_apsidal(problem.potential, problem.R)
    return Constraints(gamma(problem, phi_c) - 1.0, True, fourth_order_violation(problem))


# ---------------------------------------------------------------------------
# reconstruction of U(r) from Phi_C(r)


@dataclass(frozen=True)
class Reconstruction:
    r: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    r_ref: float


def _check_grid(r):
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 3:
        raise InvalidGrid("reconstruction grid must be 1-D with at least 3 points")
    if not np.all(np.isfinite(r)) or r[0] <= 0:
        raise InvalidGrid("reconstruction grid must be finite and positive")
    if np.any(np.diff(r) <= 0):
        raise InvalidGrid("reconstruction grid must be strictly increasing")
    return r


def _law_values(law, rho):
    try:
        vals = np.asarray(law(rho), dtype=float)
    except (TypeError, ValueError):
        vals = np.vectorize(lambda v: float(law(v)), otypes=[float])(rho)
    vals = np.broadcast_to(vals, np.shape(rho))
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise DomainError("circular apsidal law must be finite and positive")
    return vals


def _segment_integrals(fn, lo, hi, order):
    # int_lo^hi fn for arrays of segments, fixed Gauss-Legendre order
    t, w = _leggauss(order)
    half = 0.5 * (hi - lo)[..., None]
    mid = 0.5 * (hi + lo)[..., None]
    return np.sum(w * fn(mid + half * t), axis=-1) * half[..., 0]


def _converged(compute, tol, min_order=8, max_order=512):
    n = min_order
    prev = compute(n)
    while n < max_order:
        n *= 2
        cur = compute(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            return cur
        prev = cur
    raise ToleranceNotMet(f"reconstruction quadrature did not converge by order {max_order}")


def reconstruct_potential(phi_c_law: Callable, r, tol: float = 1e-10) -> Reconstruction:
    """Sample ``U(r)`` whose circular apsidal angle is ``phi_c_law(r)``.

    Integrates ``(ln U')' = -(3 - (pi / Phi_C)**2) / r`` and then ``U'``,
    gauged so that ``U(r_ref) = 0`` and ``U'(r_ref) = 1`` at the middle
    grid point ``r_ref = r[n // 2]``.
    """
    r = _check_grid(r)
    ref = r.size // 2

    def g(rho):
        return (3.0 - (math.pi / _law_values(phi_c_law, rho)) ** 2) / rho

    lo, hi = r[:-1], r[1:]
    # ln U' at the grid points, accumulated segment by segment
    seg = _converged(lambda n: _segment_integrals(g, lo, hi, n), tol)
    ln_du = -np.concatenate(([0.0], np.cumsum(seg)))
    ln_du -= ln_du[ref]

    def inner(n):
        # int over each segment of exp(ln U'(r_i) - int_{r_i}^{s} g)
        t, w = _leggauss(n)
        half = 0.5 * (hi - lo)[:, None]
        s = 0.5 * (hi + lo)[:, None] + half * t
        partial = _segment_integrals(g, np.broadcast_to(lo[:, None], s.shape), s, n)
        du = np.exp(ln_du[:-1, None] - partial)
        return np.sum(w * du, axis=-1) * half[:, 0]

    u_seg = _converged(inner, tol)
    U = np.concatenate(([0.0], np.cumsum(u_seg)))
    U -= U[ref]
    return Reconstruction(r, U, np.exp(ln_du), float(r[ref]))


def local_exponent(r, dU) -> np.ndarray:
    """``d ln U' / d ln r`` by second-order finite differences."""
    r = np.asarray(r, dtype=float)
    return np.gradient(np.log(np.abs(dU)), np.log(r), edge_order=2)
