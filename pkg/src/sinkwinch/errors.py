"""Exception hierarchy for the sinkwinch package."""


class SinkwinchError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SinkwinchError, ValueError):
    """Invalid mechanism or run configuration."""


class ZeroLengthCable(SinkwinchError):
    """An attachment point coincides with its anchor, so the cable direction is undefined."""


class GeometryInfeasible(SinkwinchError):
    """The single-cable hanging geometry has no real solution."""


class DimensionMismatch(SinkwinchError, ValueError):
    """Residual function and unknown vector disagree in size."""


class NonFiniteResidual(SinkwinchError, FloatingPointError):
    """A residual evaluation produced NaN or infinity."""


class SolverFailed(SinkwinchError):
    """A nonlinear solve did not converge.

    The originating :class:`~sinkwinch.solver.SolveReport` is attached as
    ``report`` when one is available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RankCollapse(SinkwinchError):
    """Least-squares tensions do not balance the load at the given pose."""
