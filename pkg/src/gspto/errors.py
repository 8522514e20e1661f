"""Exception types shared across the package."""


class GsptoError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(GsptoError, ValueError):
    """A point, vector, or value handed to an operation is malformed."""


class InvalidParameterError(GsptoError, ValueError):
    """A configuration parameter is out of its admissible range."""


class NegativeFitnessError(GsptoError):
    """The power transform was fed a negative fitness value."""

    def __init__(self, value):
        self.value = value
        super().__init__(f"power transform requires nonnegative fitness, got {value!r}")


class AnchorError(GsptoError):
    """Stable power weighting needs a strictly positive anchor fitness."""

    def __init__(self, value):
        self.value = value
        super().__init__(f"stable power weighting needs anchor fitness > 0, got {value!r}")


class ExternalObjectiveError(GsptoError):
    """The external scorer broke the wire protocol or died."""

    def __init__(self, message, raw_line=None):
        self.raw_line = raw_line
        if raw_line is not None:
            message = f"{message} (raw response: {raw_line!r})"
        super().__init__(message)


class QuadratureError(GsptoError):
    """Grid refinement did not converge; both estimates are attached."""

    def __init__(self, coarse, fine, rtol):
        self.coarse = coarse
        self.fine = fine
        self.rtol = rtol
        super().__init__(
            f"quadrature refinement not converged to rtol={rtol:g}: "
            f"coarse={coarse!r}, refined={fine!r}"
        )


class AssumptionViolationError(GsptoError):
    """The objective does not exhibit the unique-maximum gap the theory needs."""


class ConfigError(GsptoError):
    """An experiment configuration file or mapping is invalid."""


class RunAbortedError(GsptoError):
    """An optimizer run died mid-flight; carries the failing iteration."""

    def __init__(self, iteration, cause):
        self.iteration = iteration
        super().__init__(f"run aborted at iteration {iteration}: {cause}")
