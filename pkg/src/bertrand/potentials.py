"""Central potentials, the radial effective potential and the Clairaut
(Binet) potential.

Three analytic families are supported, plus tabulated samples::

    U(r) =  k r**nu + B          PowerLawPositive,   nu > 0
    U(r) = -k r**(-nu) + B       PowerLawAttractive, 0 < nu < 2
    U(r) =  k ln(r) + B          Logarithmic

In the Clairaut variable ``x = L / (m r)`` the orbit is a one-dimensional
motion in the potential ``W(x) = m x**2 / 2 + U(L / (m x))``. For the
analytic families ``U(L/(m x)) - B`` is a single power of ``x`` (or a
logarithm), so ``W`` and all its derivatives have closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    NonPositiveClairautVariable,
    NonPositiveRadius,
    UnstableCircularOrbit,
    UnsupportedDerivativeOrder,
)

#: Highest derivative of ``W`` exposed for the analytic families. The fifth
#: derivative feeds the third perturbative coefficient.
MAX_ANALYTIC_ORDER = 5
MAX_TABULATED_ORDER = 2

# below this |x/x0 - 1| the excess W(x) - V_R is summed as a power series
_SERIES_RADIUS = 0.05


class Family(enum.Enum):
    POWER_LAW_POSITIVE = "powerlaw:+"
    POWER_LAW_ATTRACTIVE = "powerlaw:-"
    LOGARITHMIC = "log"
    TABULATED = "tabulated"

    @property
    def analytic(self) -> bool:
        return self is not Family.TABULATED


@dataclass(frozen=True)
class PotentialSpec:
    """A central potential ``U(r)``.

    ``offset`` is the additive constant B. It shifts energies but never
    enters a force.
    """

    family: Family
    k: float = 1.0
    nu: float = 1.0
    offset: float = 0.0
    radii: np.ndarray | None = field(default=None, compare=False, repr=False)
    values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        fam = self.family
        if fam.analytic and not self.k > 0:
            raise DomainError(f"coupling k must be positive, got {self.k}")
        if fam is Family.POWER_LAW_POSITIVE and not self.nu > 0:
            raise DomainError(f"positive power law needs nu > 0, got {self.nu}")
        if fam is Family.POWER_LAW_ATTRACTIVE and not 0 < self.nu < 2:
            raise DomainError(f"attractive power law needs 0 < nu < 2, got {self.nu}")
        if fam is Family.TABULATED:
            if self.radii is None or self.values is None:
                raise DomainError("tabulated potential needs radii and values")
            radii = np.asarray(self.radii, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if radii.ndim != 1 or radii.shape != values.shape or radii.size < 4:
                raise DomainError("tabulated potential needs >= 4 matching samples")
            if radii[0] <= 0 or np.any(np.diff(radii) <= 0):
                raise DomainError("tabulated radii must be positive and strictly increasing")
            object.__setattr__(self, "radii", radii)
            object.__setattr__(self, "values", values)

    @property
    def clairaut_exponent(self) -> float:
        """Power ``q`` of ``x`` in ``U(L/(m x))``; 0 stands for the logarithm."""
        if self.family is Family.POWER_LAW_POSITIVE:
            return -self.nu
        if self.family is Family.POWER_LAW_ATTRACTIVE:
            return self.nu
        if self.family is Family.LOGARITHMIC:
            return 0.0
        raise DomainError("tabulated potentials have no Clairaut exponent")

    def describe(self) -> str:
        if self.family is Family.LOGARITHMIC:
            return f"log:k={self.k!r}"
        if self.family is Family.TABULATED:
            return f"tabulated:n={self.radii.size}"
        return f"{self.family.value},nu={self.nu!r},k={self.k!r}"


def power_law(nu, k=1.0, attractive=False, offset=0.0) -> PotentialSpec:
    fam = Family.POWER_LAW_ATTRACTIVE if attractive else Family.POWER_LAW_POSITIVE
    return PotentialSpec(fam, k=k, nu=nu, offset=offset)


def kepler(k=1.0) -> PotentialSpec:
    """Newton potential ``-k / r``."""
    return power_law(1.0, k, attractive=True)


def hooke(k=1.0) -> PotentialSpec:
    """Harmonic potential ``k r**2``."""
    return power_law(2.0, k)


def logarithmic(k=1.0, offset=0.0) -> PotentialSpec:
    return PotentialSpec(Family.LOGARITHMIC, k=k, nu=0.0, offset=offset)


def tabulated(radii, values) -> PotentialSpec:
    return PotentialSpec(Family.TABULATED, k=1.0, nu=0.0, radii=radii, values=values)


def parse_potential(text: str) -> PotentialSpec:
    """Parse ``powerlaw:+,nu=2,k=1``, ``powerlaw:-,nu=1,k=1`` or ``log:k=1``.

    Case-insensitive; unknown keys are rejected.
    """
    s = text.strip().lower().replace(" ", "")
    head, sep, rest = s.partition(":")
    if not sep:
        raise ValueError(f"malformed potential spec {text!r}")
    if head == "powerlaw":
        sign, _, rest = rest.partition(",")
        if sign not in ("+", "-"):
            raise ValueError(f"power law sign must be '+' or '-', got {sign!r}")
        allowed = {"nu", "k", "b", "offset"}
    elif head == "log":
        sign = None
        allowed = {"k", "b", "offset"}
    else:
        raise ValueError(f"unknown potential family {head!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or key not in allowed:
            raise ValueError(f"unknown or malformed key {item!r} in potential spec")
        if key == "b":
            key = "offset"
        if key in params:
            raise ValueError(f"duplicate key {key!r} in potential spec")
        params[key] = float(val)
    if head == "log":
        return logarithmic(params.get("k", 1.0), params.get("offset", 0.0))
    if "nu" not in params:
        raise ValueError("power law spec needs nu=<float>")
    return power_law(
        params["nu"], params.get("k", 1.0), attractive=(sign == "-"), offset=params.get("offset", 0.0)
    )


def _falling(p, n):
    out = 1.0
    for j in range(n):
        out *= p - j
    return out


def _as_output(arr, scalar):
    return float(arr) if scalar else arr


def _local_cubic(spec, r, order):
    radii, values = spec.radii, spec.values
    if np.any(r < radii[0]) or np.any(r > radii[-1]):
        raise DomainError(f"radius outside tabulated range [{radii[0]}, {radii[-1]}]")
    idx = np.clip(np.searchsorted(radii, r) - 2, 0, radii.size - 4)
    out = np.empty_like(r)
    for i, (ri, j) in enumerate(zip(r.flat, idx.flat)):
        coef = np.polyfit(radii[j:j + 4] - ri, values[j:j + 4], 3)[::-1]
        out.flat[i] = math.factorial(order) * coef[order]
    return out


def _u_derivative(spec, r, order):
    fam = spec.family
    if fam is Family.POWER_LAW_POSITIVE:
        val = spec.k * _falling(spec.nu, order) * r ** (spec.nu - order)
    elif fam is Family.POWER_LAW_ATTRACTIVE:
        val = -spec.k * _falling(-spec.nu, order) * r ** (-spec.nu - order)
    elif fam is Family.LOGARITHMIC:
        if order == 0:
            val = spec.k * np.log(r)
        else:
            val = spec.k * (-1) ** (order - 1) * math.factorial(order - 1) * r ** (-float(order))
    else:
        if order > MAX_TABULATED_ORDER:
            raise UnsupportedDerivativeOrder(
                f"tabulated potentials support derivatives up to order {MAX_TABULATED_ORDER}"
            )
        val = _local_cubic(spec, r, order)
    if order == 0:
        val = val + spec.offset
    return val


def eval_potential(spec: PotentialSpec, r, order: int = 0):
    """Return ``d^order U / dr^order`` at ``r`` (scalar or array)."""
    if order not in range(5):
        raise UnsupportedDerivativeOrder(f"derivative order must be 0..4, got {order}")
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonPositiveRadius("radius must be positive")
    return _as_output(_u_derivative(spec, r, order), scalar)


@dataclass(frozen=True)
class RadialProblem:
    """A potential together with a mass and an angular momentum.

    The circular radius ``R``, the Clairaut equilibrium ``x0 = L/(m R)`` and
    the minimum effective energy ``V_R`` are derived on construction.
    """

    potential: PotentialSpec
    m: float = 1.0
    L: float = 1.0
    R: float = field(init=False)
    x0: float = field(init=False)
    V_R: float = field(init=False)

    def __post_init__(self):
        from .turning import circular_radius

        if not self.m > 0 or not self.L > 0:
            raise DomainError("mass and angular momentum must be positive")
        R = circular_radius(self.potential, self.m, self.L)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "x0", self.L / (self.m * R))
        spec = self.potential
        if spec.family.analytic:
            q = spec.clairaut_exponent
            if q == 0.0:
                vr = 0.5 * self.m * self.x0**2 + spec.k * math.log(R)
            else:
                vr = 0.5 * self.m * self.x0**2 * (1.0 - 2.0 / q)
            vr += spec.offset
        else:
            vr = float(_u_derivative(spec, np.asarray(R), 0)) + self.L**2 / (2 * self.m * R**2)
            if effective_potential(self, R, 2) < 0:
                raise UnstableCircularOrbit(f"V_L''(R) < 0 at R={R}")
        object.__setattr__(self, "V_R", vr)

    @property
    def scale(self) -> float:
        """``L/m``, so that ``r = scale / x``."""
        return self.L / self.m

    @property
    def is_attractive(self) -> bool:
        return self.potential.family is Family.POWER_LAW_ATTRACTIVE

    @property
    def escape_energy(self) -> float:
        """Energy above which orbits are unbounded (``inf`` if none)."""
        return self.potential.offset if self.is_attractive else math.inf

    def with_L(self, L) -> "RadialProblem":
        return RadialProblem(self.potential, self.m, L)


def clairaut_coefficient(problem: RadialProblem) -> float:
    """``A = 2 (k/m) (L/m)**(+-nu)`` in ``W = m (x**2 +- A x**(-+nu)) / 2``."""
    spec = problem.potential
    if spec.family is Family.POWER_LAW_POSITIVE:
        return 2 * spec.k / problem.m * problem.scale**spec.nu
    if spec.family is Family.POWER_LAW_ATTRACTIVE:
        return 2 * spec.k / problem.m * problem.scale ** (-spec.nu)
    raise DomainError("Clairaut coefficient is defined for power laws only")


def effective_potential(problem: RadialProblem, r, order: int = 0):
    """``V_L(r) = U(r) + L**2 / (2 m r**2)`` and its first two derivatives."""
    if order not in (0, 1, 2):
        raise UnsupportedDerivativeOrder(f"effective potential order must be 0..2, got {order}")
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonPositiveRadius("radius must be positive")
    barrier = problem.L**2 / (2 * problem.m) * _falling(-2.0, order) * r ** (-2.0 - order)
    return _as_output(_u_derivative(problem.potential, r, order) + barrier, scalar)


def clairaut_potential(problem: RadialProblem, x, order: int = 0):
    """``W(x) = m x**2 / 2 + U(L/(m x))`` and its derivatives.

    Analytic families accept ``order`` up to 5, tabulated ones up to 2.
    """
    spec = problem.potential
    limit = MAX_ANALYTIC_ORDER if spec.family.analytic else MAX_TABULATED_ORDER
    if order not in range(limit + 1):
        raise UnsupportedDerivativeOrder(f"Clairaut potential order must be 0..{limit}, got {order}")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveClairautVariable("Clairaut variable must be positive")
    m, c = problem.m, problem.scale
    kinetic = (0.5 * m * x**2, m * x, m + 0 * x)[order] if order < 3 else 0 * x
    fam = spec.family
    if fam is Family.POWER_LAW_POSITIVE or fam is Family.POWER_LAW_ATTRACTIVE:
        q = spec.clairaut_exponent
        # s K x**q == U(c/x) - B
        sk = spec.k * c**spec.nu if q < 0 else -spec.k * c ** (-spec.nu)
        val = kinetic + sk * _falling(q, order) * x ** (q - order)
    elif fam is Family.LOGARITHMIC:
        if order == 0:
            val = kinetic + spec.k * (math.log(c) - np.log(x))
        else:
            val = kinetic - spec.k * (-1) ** (order - 1) * math.factorial(order - 1) * x ** (-float(order))
    else:
        r = c / x
        if order == 0:
            val = kinetic + _u_derivative(spec, r, 0) - spec.offset
        elif order == 1:
            val = kinetic - _u_derivative(spec, r, 1) * c / x**2
        else:
            u1 = _u_derivative(spec, r, 1)
            u2 = _u_derivative(spec, r, 2)
            val = kinetic + u2 * (c / x**2) ** 2 + u1 * 2 * c / x**3
    if order == 0:
        val = val + spec.offset
    return _as_output(val, scalar)


def _log_ratio(x, x0, u):
    small = np.abs(u) < 0.5
    return np.where(small, np.log1p(np.where(small, u, 0.0)), np.log(x / x0))


def _excess_series(u, q):
    # (t**2 - 1) - (2/q)(t**q - 1) = sum_{n>=2} c_n u**n with t = 1 + u
    b = q - 1.0
    total = (2.0 - q) * u * u
    power = u * u
    for n in range(2, 200):
        b *= (q - n) / (n + 1)
        power = power * u
        term = -b * power
        total = total + term
        if np.all(np.abs(term) <= 1e-18 * np.abs(total)):
            break
    return total


def clairaut_excess(problem: RadialProblem, x):
    """``W(x) - V_R`` evaluated without cancellation near the minimum."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveClairautVariable("Clairaut variable must be positive")
    spec = problem.potential
    if not spec.family.analytic:
        return _as_output(clairaut_potential(problem, x) - problem.V_R, scalar)
    x0 = problem.x0
    q = spec.clairaut_exponent
    u = (x - x0) / x0
    lnt = _log_ratio(x, x0, u)
    t2m1 = u * (u + 2.0)
    if q == 0.0:
        far = t2m1 - 2.0 * lnt
    else:
        far = t2m1 - (2.0 / q) * np.expm1(q * lnt)
    near = np.abs(u) <= _SERIES_RADIUS
    if np.any(near):
        far = np.where(near, _excess_series(np.where(near, u, 0.0), q), far)
    return _as_output(0.5 * problem.m * x0 * x0 * far, scalar)


def clairaut_slope(problem: RadialProblem, x):
    """``W'(x)``, written so that it stays accurate close to ``x0``."""
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveClairautVariable("Clairaut variable must be positive")
    spec = problem.potential
    if not spec.family.analytic:
        return _as_output(clairaut_potential(problem, x, 1), scalar)
    x0 = problem.x0
    q = spec.clairaut_exponent
    u = (x - x0) / x0
    lnt = _log_ratio(x, x0, u)
    # W'(x) = m x (1 - t**(q-2))
    return _as_output(-problem.m * x * np.expm1((q - 2.0) * lnt), scalar)


def clairaut_step(problem: RadialProblem, x, h):
    """``W(x + h) - W(x)``, accurate even when ``|h|`` is far below ``ulp(x)``."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    spec = problem.potential
    if not spec.family.analytic:
        return clairaut_potential(problem, x + h) - clairaut_potential(problem, x)
    x0 = problem.x0
    q = spec.clairaut_exponent
    t = x / x0
    mu = h / x
    quad = t * t * mu * (2.0 + mu)
    if q == 0.0:
        rest = 2.0 * np.log1p(mu)
    else:
        rest = (2.0 / q) * t**q * np.expm1(q * np.log1p(mu))
    return 0.5 * problem.m * x0 * x0 * (quad - rest)
