"""Exception types shared across the package."""


class WeylshiftError(Exception):
    """Base class for all domain errors raised by this package."""


class AtomAtEndpointError(WeylshiftError):
    """An evaluation point coincides with an atom of the potential."""


class TruncationError(WeylshiftError):
    """The propagation radius cap was reached before the target accuracy."""

    def __init__(self, message, achieved_radius):
        super().__init__(message)
        self.achieved_radius = achieved_radius


class PoleError(WeylshiftError):
    """The Green function diagonal is evaluated at (or too close to) a pole."""


class UndefinedLimitError(WeylshiftError):
    """A boundary-value quantity is undefined at the requested energy."""


class OutOfCoverageError(WeylshiftError):
    """A past-window input lies outside the predictor's coverage region."""

    def __init__(self, message, min_distance):
        super().__init__(message)
        self.min_distance = min_distance


class ClusterCapError(WeylshiftError):
    """Greedy clustering exceeded the configured number of clusters."""


class CalibrationError(WeylshiftError):
    """No window/ball-size pair met the requested prediction accuracy."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(WeylshiftError):
    """A run configuration failed validation."""

    def __init__(self, problems):
        super().__init__("; ".join(f"{field}: {reason}" for field, reason in problems))
        self.problems = problems
