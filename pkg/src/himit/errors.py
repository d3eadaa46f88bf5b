"""Exception hierarchy shared by every himit module."""


class HimitError(Exception):
    """Base class for toolkit errors."""


class InputError(HimitError, ValueError):
    """Malformed arguments: wrong shapes, indices out of range, bad counts."""


class ValidationError(HimitError, ValueError):
    """An object violates a structural invariant (non-unitary gate, non-TP channel...)."""


class NumericalConsistencyError(HimitError, ArithmeticError):
    """A quantity that must be real (or normalized) came out otherwise."""


class ConfigurationError(HimitError, ValueError):
    """Inconsistent experiment or noise configuration."""


class UnsupportedGateError(HimitError, ValueError):
    """A pass or estimator received a gate it cannot handle."""
