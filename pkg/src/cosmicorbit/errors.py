"""Exception hierarchy shared by every module of the package."""


class CosmicError(Exception):
    """Base class for all errors raised by cosmicorbit."""

    #: Orbit step at which the error surfaced, filled in by the orbit engine.
    step = None


class DimensionMismatch(CosmicError, ValueError):
    pass


class DomainError(CosmicError, ValueError):
    """Malformed input: non-finite coordinates, bad descriptor parameters."""


class ZeroVector(CosmicError, ValueError):
    """A direction was requested for a vector of (numerically) zero length."""


class NonUnitDirection(CosmicError, ValueError):
    pass


class BasisNotOrthonormal(CosmicError, ValueError):
    pass


class EmptySet(CosmicError, ValueError):
    pass


class UnsupportedDimension(CosmicError, ValueError):
    pass


class OrbitTooShort(CosmicError, ValueError):
    pass


class FixedPointDetected(CosmicError):
    """The one-dimensional dichotomy premise (no fixed point) was violated."""


class NumericalError(CosmicError, ArithmeticError):
    """An iterative solver failed; the CLI maps this family to exit code 3."""


class NoConvergence(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class ScenarioError(CosmicError):
    """Problems with a scenario file; the CLI maps this family to exit code 2."""


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass
