"""Exception hierarchy shared by all modules.

Every numerical failure derives from ``NumericalError`` so the command line
front end can map it to exit code 2 and print the class name.
"""


class NumericalError(Exception):
    """Base class for failures of a numerical computation."""


class NonFinite(NumericalError):
    """The solution overflowed the guard before the stop rule was met."""


class TooFewZeros(NumericalError):
    """The integration range ended before the requested number of zeros."""


class RangeError(NumericalError, ValueError):
    """A query fell outside the interval covered by a trajectory."""


class StructureViolation(NumericalError):
    """Nodal structure (interlacing or ordering of extrema) failed."""


class UnsupportedOrder(NumericalError, ValueError):
    pass


class DomainError(NumericalError, ValueError):
    pass


class DegenerateProfile(NumericalError):
    pass


class Degenerate(NumericalError):
    """The linearized operator has a (numerically) nontrivial kernel."""


class Indeterminate(NumericalError):
    """A sign decision fell inside the indeterminacy band."""


class InsufficientTail(NumericalError):
    """Too few points, or too narrow a range, for a tail fit."""


class UnknownName(NumericalError, KeyError):
    pass
