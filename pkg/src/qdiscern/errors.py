"""Exception hierarchy.

Input problems derive from ``ValueError``; numerical trouble that should be
impossible in exact arithmetic derives from ``ArithmeticError`` so callers
(and the CLI exit codes) can tell the two apart.
"""


class DimensionError(ValueError):
    pass


class NotUnitError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class NumericalCorruption(ArithmeticError):
    """A quantity came out in a way exact arithmetic forbids."""


class InvariantViolation(ArithmeticError):
    """A proven inequality failed beyond tolerance; indicates a bug."""
