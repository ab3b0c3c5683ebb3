"""Exception types raised across the package."""


class ParetoTailsError(Exception):
    pass


class EmptySample(ParetoTailsError, ValueError):
    """No positive observations left after cleaning."""


class TooFewTailObs(ParetoTailsError, ValueError):
    """The tail count is below 2, so the Hill estimator is undefined."""


class DegenerateTail(ParetoTailsError, ValueError):
    """All tail observations equal the threshold; the estimate would be +inf."""


class TailTooShort(ParetoTailsError, ValueError):
    """floor(k * t0) < 2, so the inverse-Hill path cannot start at t0."""


class NoRoot(ParetoTailsError, ValueError):
    """The moment equation has no positive root (light tail)."""


class Unbounded(ParetoTailsError, ValueError):
    """A moment E[X^z] diverged inside the search range."""


class AssumptionViolated(ParetoTailsError, ValueError):
    pass


class InfeasibleGrid(ParetoTailsError, ValueError):
    pass


class ExistenceConditionError(ParetoTailsError, ValueError):
    """The sufficient condition for a unique solution of the savings problem fails."""


class NoConvergence(ParetoTailsError, RuntimeError):
    def __init__(self, message, iterations=None, sup_change=None):
        super().__init__(message)
        self.iterations = iterations
        self.sup_change = sup_change


class SchemaError(ParetoTailsError, ValueError):
    pass


class TooManyBadRows(ParetoTailsError, ValueError):
    pass


class StageError(ParetoTailsError, RuntimeError):
    """Wraps a failure in a model pipeline run with the name of the failing stage."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class BelowMinimumSample(ParetoTailsError, ValueError):
    """Fewer positive observations than the configured minimum N_min."""


class NotStationary(UserWarning):
    """The simulated income tail still drifts between the last two snapshots."""
