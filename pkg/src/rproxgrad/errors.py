"""Exception types raised across the package."""


class RproxgradError(Exception):
    """Base class for all errors raised by this package."""


class SingularSystem(RproxgradError):
    """A Sylvester/Lyapunov system has no solution meeting the residual
    tolerance (the coefficient spectra overlap, or the points involved are
    too far apart for an inverse retraction / transport to exist)."""


class NotPositiveDefinite(RproxgradError):
    """A matrix required to be symmetric positive definite is not."""


class AntipodalPoints(RproxgradError):
    """The sphere logarithm is undefined for (numerically) antipodal points."""


class NumericalDomain(RproxgradError):
    """An iterate left the domain where a formula is defined (e.g. x^T y
    fell out of (-1, 1] during the sphere proximal iteration)."""


class MaxIterExceeded(RproxgradError):
    """An inner solver hit its iteration cap before reaching tolerance.

    Attributes
    ----------
    best_residual : float
        Smallest residual seen before giving up.
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class StepTooLong(RproxgradError):
    """A vector transport became singular; the tangent step was too large
    for the differentiated retraction to be invertible."""


class InverseRetractionFailure(RproxgradError):
    """An accelerated solver could not map one iterate into the tangent
    space of another (iterate spread too large).

    Attributes
    ----------
    iteration : int
        Outer iteration at which the failure occurred.
    partial_trace : list
        Iteration records collected before the failure.
    """

    def __init__(self, message, iteration=None, partial_trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.partial_trace = partial_trace if partial_trace is not None else []


class UnboundedEstimate(RproxgradError):
    """The adaptive smoothness estimate grew past any plausible value,
    which signals a modeling error in the objective or its gradient."""


class ProxSolveFailure(RproxgradError):
    """A proximal subproblem failed inside an outer solver loop.

    Attributes
    ----------
    iteration : int
        Outer iteration at which the subproblem failed.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class InsufficientData(RproxgradError):
    """Not enough usable trace points for a diagnostic fit."""


class BadShape(RproxgradError):
    """Input dimensions are incompatible with the requested construction."""


class ConfigError(RproxgradError):
    """An experiment configuration is malformed or inconsistent."""
