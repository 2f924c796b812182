"""Exception types shared across the package."""


class PetalflowError(Exception):
    """Base class for numerical failures raised by petalflow."""


class DivergentLimit(PetalflowError):
    """A radial/angular limit did not stabilize under extrapolation."""


class StepUnderflow(PetalflowError):
    """The adaptive ODE step collapsed below the minimum step size."""


class PathThroughZero(PetalflowError):
    """The integration path for a linearizer ran into a zero of the generator."""


class NoConvergence(PetalflowError):
    """Newton iteration (or continuation) failed to reach the target."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class AlphaTooSmall(PetalflowError, ValueError):
    """Requested petal parameter alpha is below -gamma."""


class UnsupportedRegime(PetalflowError, ValueError):
    """Operation requires a hyperbolic or interior-attracting generator."""
