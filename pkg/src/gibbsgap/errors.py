"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid user input: bad pmf, bad scan spec, out-of-range parameter."""


class SpaceMismatchError(ValidationError):
    """Two objects were combined that live on different state spaces."""


class StateCapError(RuntimeError):
    """The requested state space exceeds the dense-algebra cap."""


class InequalityViolationError(RuntimeError):
    """An asserted inequality was violated beyond tolerance."""


class NumericError(RuntimeError):
    """A dense solver failed to converge or returned garbage."""
