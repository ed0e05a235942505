"""Apsidal angles, Abel inversion and isochrony tests for central-force
orbits."""

from .errors import *  # noqa: F401,F403
from .potentials import (  # noqa: F401
    Family,
    PotentialSpec,
    RadialProblem,
    clairaut_potential,
    effective_potential,
    eval_potential,
    hooke,
    kepler,
    logarithmic,
    parse_potential,
    power_law,
    tabulated,
)
from .turning import TurningPair, circular_apsidal, circular_radius, turning_points  # noqa: F401
from .apsidal import ApsidalResult, apsidal_angle, apsidal_sweep  # noqa: F401
from .fractional import EnergyFunction, Regularity, invert_period, semi_derivative, semi_integral  # noqa: F401
from .isochrony import bertrand_scan, isochrony_residual, lateral_map, reconstruct_potential  # noqa: F401

__version__ = "0.1.0"
