"""Exception types shared across the package.

DomainError subclasses signal bad physical input (caller mistake),
NumericsError subclasses signal that a computation could not be
completed reliably (tolerance not reached, flow too stiff, symmetry
broken by accumulated roundoff).
"""


class DomainError(ValueError):
    """Input lies outside the physically meaningful domain."""


class GapClosedError(DomainError):
    """Operation needs a finite band gap but delta <= 0."""


class NumericsError(RuntimeError):
    """A numerical procedure failed to meet its tolerance."""


class QuadratureError(NumericsError):
    """Adaptive momentum integration did not converge.

    Carries the last grid size and the last two estimates so the caller
    can see how far off the integral was.
    """

    def __init__(self, message, n_points=None, estimate=None, error=None):
        super().__init__(message)
        self.n_points = n_points
        self.estimate = estimate
        self.error = error


class StiffnessError(NumericsError):
    """The ODE integrator gave up before reaching a stopping condition."""


class SymmetryLeakageError(NumericsError):
    """Vertex weight outside the symmetry-allowed classes grew too large."""
