"""Exception types shared across the package."""


class NumericalDegeneracyError(Exception):
    """A quantity is undefined for the given inputs (zero denominator,
    fully absorbed state, empty conditional branch, ...)."""


class InsufficientDataError(Exception):
    """Not enough observations to form the requested estimate."""
