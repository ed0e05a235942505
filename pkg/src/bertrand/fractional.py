"""Semi-derivative and semi-integral (Abel) operators on functions of the
energy, and inversion of a period law into the width of the potential well.

Both operators are normalized with ``1/sqrt(pi)``::

    D^{+1/2} g(E) = 1/sqrt(pi) * int_{V}^{E} g'(w) / sqrt(E - w) dw
    D^{-1/2} g(E) = 1/sqrt(pi) * int_{V}^{E} g(w)  / sqrt(E - w) dw

so that ``D^{-1/2} 1 = (2/sqrt(pi)) sqrt(E - V)`` and
``D^{-1/2} D^{+1/2} g = g`` whenever ``g(V) = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._quadrature import abel_kernel
from .errors import DomainError, EnergyBelowMinimum, RegularityViolation
from .potentials import RadialProblem
from .turning import TurningPair

_SQRT_PI = math.sqrt(math.pi)


class Regularity(enum.Enum):
    VANISHES_AT_BASE = "vanishes_at_base"
    BOUNDED_AT_BASE = "bounded_at_base"


@dataclass(frozen=True)
class EnergyFunction:
    """A function of the energy on ``[base, inf)``.

    With ``relative=True`` the callables receive the offset ``w - base``
    instead of ``w``; this avoids losing digits when ``w`` sits just above a
    large ``base``. Callables should accept numpy arrays; scalar-only
    callables are evaluated element by element.
    """

    eval: Callable
    base: float
    regularity: Regularity = Regularity.BOUNDED_AT_BASE
    derivative: Callable | None = None
    relative: bool = False

    def __call__(self, w):
        return _apply(self.eval, w - self.base if self.relative else w)

    def at_offset(self, offset):
        return _apply(self.eval, offset if self.relative else self.base + offset)

    def derivative_at_offset(self, offset):
        return _apply(self.derivative, offset if self.relative else self.base + offset)


def _apply(fn, arg):
    arg = np.asarray(arg, dtype=float)
    try:
        out = np.asarray(fn(arg), dtype=float)
    except (TypeError, ValueError):
        out = np.vectorize(lambda a: float(fn(a)), otypes=[float])(arg)
    return np.broadcast_to(out, arg.shape).astype(float)


def constant(value: float, base: float) -> EnergyFunction:
    return EnergyFunction(lambda w: np.full(np.shape(w), float(value)), base)


def _span(g: EnergyFunction, E: float) -> float:
    span = E - g.base
    if span < 0:
        raise DomainError(f"E={E!r} lies below the base point {g.base!r}")
    return span


def _finite(values):
    if not np.all(np.isfinite(values)):
        raise RegularityViolation("function is not finite on the integration range")
    return values


def _fd_step(span):
    return max(1e-6, 1e-6 * span)


def _central_difference(g: EnergyFunction, offset, h0):
    # 4th-order stencil, step clamped so that offset - 2h stays above base
    h = np.minimum(h0, offset / 16.0)
    f = g.at_offset
    return (-f(offset + 2 * h) + 8 * f(offset + h) - 8 * f(offset - h) + f(offset - 2 * h)) / (12 * h)


def semi_derivative(g: EnergyFunction, E: float, tol: float = 1e-10) -> float:
    """Semi-derivative ``D^{1/2} g`` at ``E``; ``g`` must vanish at its base."""
    if g.regularity is not Regularity.VANISHES_AT_BASE:
        raise RegularityViolation("semi-derivative requires a function vanishing at its base")
    span = _span(g, E)
    if span == 0.0:
        return 0.0
    g0 = float(g.at_offset(0.0))
    if abs(g0) > 1e-10 * max(1.0, abs(float(g.at_offset(span)))):
        raise RegularityViolation(f"g(base) = {g0!r} does not vanish")
    if g.derivative is not None:
        def integrand(w, offset):
            return _finite(g.derivative_at_offset(offset))
    else:
        h0 = _fd_step(span)

        def integrand(w, offset):
            return _finite(_central_difference(g, offset, h0))

    val, _, _ = abel_kernel(integrand, g.base, E, tol * _SQRT_PI)
    return val / _SQRT_PI


def semi_integral(g: EnergyFunction, E: float, tol: float = 1e-10) -> float:
    """Semi-integral ``D^{-1/2} g`` at ``E``; ``g`` must be bounded at its base."""
    span = _span(g, E)
    if span == 0.0:
        return 0.0

    def integrand(w, offset):
        return _finite(g.at_offset(offset))

    val, _, _ = abel_kernel(integrand, g.base, E, tol * _SQRT_PI)
    return val / _SQRT_PI


def _period_law(phi, problem: RadialProblem) -> EnergyFunction:
    if isinstance(phi, EnergyFunction):
        if phi.base != problem.V_R:
            raise DomainError("period law must be based at the problem's V_R")
        return phi
    if callable(phi):
        return EnergyFunction(phi, problem.V_R)
    return constant(phi, problem.V_R)


def invert_period(phi, problem: RadialProblem, E: float, tol: float = 1e-10) -> float:
    """Width ``x_gt(E) - x_lt(E)`` of the Clairaut well reproducing the
    apsidal-angle law ``phi``.

    ``phi`` may be an :class:`EnergyFunction` based at ``V_R``, a callable of
    the energy, or a constant angle.
    """
    if E < problem.V_R:
        raise EnergyBelowMinimum(f"E={E!r} is below V_R={problem.V_R!r}")
    law = _period_law(phi, problem)
    prefactor = math.sqrt(2.0 / (problem.m * math.pi))
    return prefactor * semi_integral(law, E, tol / prefactor)


def symmetric_branches(phi, problem: RadialProblem, E: float, tol: float = 1e-10) -> TurningPair:
    """Turning points of the unique well symmetric about ``x0`` whose
    apsidal-angle law is ``phi``."""
    half = 0.5 * invert_period(phi, problem, E, tol)
    x_lt, x_gt = problem.x0 - half, problem.x0 + half
    c = problem.scale
    r_max = c / x_lt if x_lt > 0 else math.inf
    return TurningPair(x_lt, x_gt, E, c / x_gt, r_max)
