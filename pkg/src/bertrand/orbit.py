"""Direct integration of the motion and classification of orbit closure.

Two formulations are offered, both starting at the apocentre:

* Binet, in the angle: ``x'' + W'(x)/m = 0`` with ``x = L/(m r)``, plus
  ``dt/dphi = L/(m x**2)`` so the time is carried along;
* radial, in time: ``m r'' + V_L'(r) = 0`` and ``phi' = L/(m r**2)``.

The integrator is scipy's embedded Runge-Kutta 5(4) pair. A conservation
monitor turns excessive energy drift into :class:`IntegrationFailure`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .apsidal import apsidal_angle
from .errors import DomainError, IntegrationFailure, UnboundedOrbit
from .potentials import RadialProblem, clairaut_excess, clairaut_slope
from .turning import _check_energy, is_degenerate, turning_pair_from_excess

#: Unbounded detection radius, in units of the circular radius.
ESCAPE_FACTOR = 1e6
#: Energy drift above ``DRIFT_FACTOR * tol * max(1, |E|)`` fails the run.
DRIFT_FACTOR = 100.0
#: The solver runs at ``SOLVER_SAFETY * tol``: local error control alone
#: lets the energy error grow past ``tol`` over a few radial periods.
SOLVER_SAFETY = 0.01

TRACE_COLUMNS = ("param", "r_or_x", "deriv", "phi_or_t", "energy")


@dataclass(frozen=True)
class Closure:
    """``kind`` is one of ``circular``, ``closed``, ``rosette``, ``unbounded``."""

    kind: str
    p: Optional[int] = None
    q: Optional[int] = None
    phi: float = math.nan

    def __str__(self):
        if self.kind == "closed":
            return f"closed({self.p},{self.q})"
        return self.kind


@dataclass
class OrbitTrace:
    """Sampled orbit.

    For ``formulation == "binet"`` the columns are ``(phi, x, dx/dphi, t)``;
    for ``"radial"`` they are ``(t, r, dr/dt, phi)``. ``energy`` is the
    conserved energy recomputed at every sample.
    """

    formulation: str
    param: np.ndarray
    r_or_x: np.ndarray
    deriv: np.ndarray
    phi_or_t: np.ndarray
    energy: np.ndarray
    E0: float
    L: float
    energy_drift: float
    L_drift: float = 0.0
    apocenters: np.ndarray = field(default_factory=lambda: np.empty(0))
    pericenters: np.ndarray = field(default_factory=lambda: np.empty(0))
    closure: Optional[Closure] = None
    solution: object = field(default=None, repr=False)

    def rows(self):
        return zip(self.param, self.r_or_x, self.deriv, self.phi_or_t, self.energy)

    def state_at(self, param):
        """Dense-output state ``(r_or_x, deriv, phi_or_t)`` at ``param``."""
        return self.solution(param)


def _scalar_slope(problem: RadialProblem):
    """``W'`` for one float; the integrator calls it at every stage."""
    spec = problem.potential
    if not spec.family.analytic:
        return lambda x: float(clairaut_slope(problem, x))
    m, x0, q = problem.m, problem.x0, spec.clairaut_exponent
    # W'(x) = m x (1 - (x/x0)**(q-2))
    return lambda x: -m * x * math.expm1((q - 2.0) * math.log(x / x0))


def _rhs_guard(fn):
    def wrapped(s, y):
        try:
            return fn(s, y)
        except (DomainError, ValueError) as exc:
            raise IntegrationFailure(f"integration left the physical domain: {exc}") from exc

    return wrapped


def _run(rhs, span, y0, tol, atol, events, n_samples):
    t_eval = None
    if n_samples is not None:
        t_eval = np.linspace(span[0], span[1], int(n_samples))
    sol = solve_ivp(
        _rhs_guard(rhs),
        span,
        y0,
        method="RK45",
        rtol=SOLVER_SAFETY * tol,
        atol=SOLVER_SAFETY * atol,
        events=events,
        dense_output=True,
        t_eval=t_eval,
    )
    if sol.status == -1:
        raise IntegrationFailure(f"integrator failed: {sol.message}")
    return sol


def _drop_start(times, start, span):
    # the state starts exactly on a turning point; ignore that crossing
    times = np.asarray(times, dtype=float)
    return times[np.abs(times - start) > 1e-9 * max(1.0, abs(span))]


def _monitor(drift, tol, E):
    limit = DRIFT_FACTOR * tol * max(1.0, abs(E))
    if drift > limit:
        raise IntegrationFailure(f"energy drift {drift:.3e} exceeds {limit:.3e}")


def integrate_binet(
    problem: RadialProblem,
    E: float,
    phi_span,
    tol: float = 1e-10,
    n_samples: int | None = None,
) -> OrbitTrace:
    """Integrate ``x'' + W'(x)/m = 0`` from ``x(0) = x_lt``, ``x'(0) = 0``.

    ``phi_span`` is a total angle or a ``(phi0, phi1)`` pair. With
    ``n_samples`` the trace is resampled on an even grid; otherwise the
    integrator's own steps are reported.
    """
    excess = _check_energy(problem, E)
    span = (0.0, float(phi_span)) if np.ndim(phi_span) == 0 else tuple(map(float, phi_span))
    m, L = problem.m, problem.L
    pair = turning_pair_from_excess(problem, excess, E)
    x_start = pair.x_lt
    slope = _scalar_slope(problem)

    def rhs(phi, y):
        x, v, _ = y
        return [v, -slope(x) / m, L / (m * x * x)]

    def apo(phi, y):
        return y[1]

    apo.direction = 1.0

    def peri(phi, y):
        return y[1]

    peri.direction = -1.0

    def crash(phi, y):
        return y[0]

    crash.terminal = True

    scale = max(problem.x0, 1.0)
    sol = _run(rhs, span, [x_start, 0.0, 0.0], tol, tol * scale, [apo, peri, crash], n_samples)
    if sol.t_events[2].size:
        raise IntegrationFailure("Clairaut variable reached zero")
    x, v, t = sol.y
    # E - V_R recomputed without cancellation
    rel = 0.5 * m * v * v + clairaut_excess(problem, x)
    drift = float(np.max(np.abs(rel - excess)))
    _monitor(drift, tol, E)
    width = span[1] - span[0]
    return OrbitTrace(
        "binet",
        sol.t,
        x,
        v,
        t,
        problem.V_R + rel,
        E,
        L,
        drift,
        apocenters=_drop_start(sol.t_events[0], span[0], width),
        pericenters=_drop_start(sol.t_events[1], span[0], width),
        solution=sol.sol,
    )


def integrate_radial(
    problem: RadialProblem,
    E: float,
    t_span,
    tol: float = 1e-10,
    n_samples: int | None = None,
    escape_factor: float = ESCAPE_FACTOR,
) -> OrbitTrace:
    """Integrate ``m r'' = -V_L'(r)``, ``phi' = L/(m r**2)`` from the
    apocentre ``r(0) = r_max`` at rest.

    Raises :class:`UnboundedOrbit` when the energy reaches the escape
    threshold of an attractive power law, or when ``r`` passes
    ``escape_factor * R`` during the run.
    """
    excess = _check_energy(problem, E)
    span = (0.0, float(t_span)) if np.ndim(t_span) == 0 else tuple(map(float, t_span))
    m, L, c = problem.m, problem.L, problem.scale
    pair = turning_pair_from_excess(problem, excess, E)
    r_start = pair.r_max
    slope = _scalar_slope(problem)

    def rhs(t, y):
        r, p, _ = y
        x = c / r
        # dV_L/dr = -W'(x) x**2 / c
        force = slope(x) * x * x / c
        return [p, force / m, L / (m * r * r)]

    def peri(t, y):
        return y[1]

    peri.direction = 1.0

    def apo(t, y):
        return y[1]

    apo.direction = -1.0

    r_escape = escape_factor * problem.R

    def escape(t, y):
        return y[0] - r_escape

    escape.terminal = True

    def crash(t, y):
        return y[0]

    crash.terminal = True

    sol = _run(rhs, span, [r_start, 0.0, 0.0], tol, tol * max(problem.R, 1.0), [apo, peri, escape, crash], n_samples)
    if sol.t_events[2].size:
        raise UnboundedOrbit(f"radius exceeded {r_escape:g}")
    if sol.t_events[3].size:
        raise IntegrationFailure("radius reached zero")
    r, p, phi = sol.y
    rel = 0.5 * m * p * p + clairaut_excess(problem, c / r)
    drift = float(np.max(np.abs(rel - excess)))
    _monitor(drift, tol, E)
    dphi = np.array([rhs(s, y)[2] for s, y in zip(sol.t, sol.y.T)])
    L_drift = float(np.max(np.abs(m * r * r * dphi - L)))
    width = span[1] - span[0]
    return OrbitTrace(
        "radial",
        sol.t,
        r,
        p,
        phi,
        problem.V_R + rel,
        E,
        L,
        drift,
        L_drift,
        apocenters=_drop_start(sol.t_events[0], span[0], width),
        pericenters=_drop_start(sol.t_events[1], span[0], width),
        solution=sol.sol,
    )


def _partial_quotients(x, depth=64):
    quotients = []
    for _ in range(depth):
        a = math.floor(x)
        quotients.append(a)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
    return quotients


def closure_check(phi: float, q_max: int = 20, tol: float = 1e-6) -> tuple[int, int] | None:
    """Smallest-denominator ``(p, q)`` with ``|phi/pi - p/q| <= tol``, or ``None``.

    A fraction with minimal denominator inside the tolerance band is a best
    approximation of ``phi/pi``, hence a convergent or a semiconvergent of
    its continued fraction; those are visited in order of growing ``q``.
    """
    if not phi > 0:
        raise DomainError(f"apsidal angle must be positive, got {phi!r}")
    if q_max < 1:
        raise DomainError(f"q_max must be at least 1, got {q_max!r}")
    ratio = phi / math.pi
    if ratio <= tol:
        # 0/1 is in the band but means no revolution; the first p >= 1
        # fraction in the band is 1/q with the smallest admissible q
        q = max(1, math.ceil(1.0 / (ratio + tol)))
        return (1, q) if q <= q_max and abs(ratio - 1.0 / q) <= tol else None
    quotients = _partial_quotients(ratio)
    # p_{-2}/q_{-2} = 0/1, p_{-1}/q_{-1} = 1/0
    p_prev, q_prev = 0, 1
    p_cur, q_cur = 1, 0
    for a in quotients:
        # semiconvergents between the two latest convergents, then the next
        # convergent itself (j == a)
        for j in range(1, a + 1) if q_cur else (a,):
            p, q = p_prev + j * p_cur, q_prev + j * q_cur
            if q > q_max:
                return None
            if p >= 1 and abs(ratio - p / q) <= tol:
                return p, q
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_prev + a * p_cur, q_prev + a * q_cur
    return None


def classify_orbit(problem: RadialProblem, E: float, q_max: int = 20, tol: float = 1e-6) -> Closure:
    """``circular``, ``closed(p, q)``, ``rosette`` or ``unbounded``.

    The verdict uses the quadrature apsidal angle; integrated traces serve
    as a cross-check only.
    """
    try:
        excess = _check_energy(problem, E)
    except UnboundedOrbit:
        return Closure("unbounded")
    if is_degenerate(problem, excess):
        return Closure("circular")
    phi = apsidal_angle(problem, E).phi
    found = closure_check(phi, q_max, tol)
    if found is None:
        return Closure("rosette", phi=phi)
    return Closure("closed", found[0], found[1], phi)
