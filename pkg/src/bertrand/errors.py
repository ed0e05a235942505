"""Exception hierarchy.

Domain errors (bad inputs, energies outside the admissible window) derive
from :class:`DomainError`; failures of a numerical procedure to reach its
requested accuracy derive from :class:`NumericalFailure`.
"""


class BertrandError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BertrandError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalFailure(BertrandError, ArithmeticError):
    """A numerical procedure did not reach the requested accuracy."""


class NonPositiveRadius(DomainError):
    pass


class NonPositiveClairautVariable(DomainError):
    pass


class UnsupportedDerivativeOrder(DomainError):
    pass


class NoCircularOrbit(DomainError):
    pass


class UnstableCircularOrbit(DomainError):
    pass


class EnergyBelowMinimum(DomainError):
    pass


class UnboundedOrbit(DomainError):
    pass


class RegularityViolation(DomainError):
    pass


class ProbeOutOfDomain(DomainError):
    pass


class DisplacedPointNonPositive(DomainError):
    pass


class InvalidGrid(DomainError):
    pass


class ToleranceNotMet(NumericalFailure):
    pass


class IntegrationFailure(NumericalFailure):
    pass
