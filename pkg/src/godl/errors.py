"""Exception types raised across the pipeline."""


class GodlError(Exception):
    """Base class for all library errors."""


class MalformedInput(GodlError):
    """Raised when a sequence file cannot be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidSequence(GodlError):
    """A skeleton sequence violates its structural invariants."""


class DegenerateExtent(GodlError):
    """Normalization impossible because the x extent is zero."""


class TooShort(GodlError):
    pass


class TooFewFrames(GodlError):
    pass


class MissingCluster(GodlError):
    """A cluster vanished while enforcing temporal contiguity."""


class NonFinite(GodlError):
    """An iterative solver produced NaN or Inf."""


class AllOutliers(GodlError):
    """No training frame kept a weight above the inlier cutoff."""


class ModelMismatch(GodlError):
    """Stream dimensions disagree with the trained model."""


class ConfigError(GodlError):
    pass


class DegenerateStatsWarning(UserWarning):
    """A unit has zero error spread; gates fall back to an absolute test."""
