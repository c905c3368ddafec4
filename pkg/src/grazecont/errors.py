"""Exceptions raised by the maps, the Newton solver and the continuation."""


class GrazeContError(RuntimeError):
    """Base class for numerical failures in this package."""


class NoCrossingFound(GrazeContError):
    """No local maximum of displacement was bracketed inside the horizon."""


class SingularCrossing(GrazeContError):
    """The flow arrives at the section tangentially (zero acceleration)."""


class InverseBranchFailure(GrazeContError):
    """The incoming impact point behind a virtual section point was not found."""


class MaxIterExceeded(GrazeContError):
    def __init__(self, message, z=None, amp=None, residual=None):
        super().__init__(message)
        self.z = z
        self.amp = amp
        self.residual = residual


class SingularJacobian(GrazeContError):
    """The Newton matrix is numerically singular (fold at fixed y_imp)."""


class NearGrazingSingularity(GrazeContError):
    """The section map Jacobian at the impact point cannot be inverted."""


class NoPeriodicAttractor(GrazeContError):
    """Simulation did not settle onto a p-periodic impacting orbit."""


class NoBracket(GrazeContError):
    """No sign change of the bifurcation test function was found."""


class StepFailed(GrazeContError):
    """A continuation step failed; carries everything accepted so far."""

    def __init__(self, message, index, last_good=None, partial=None):
        super().__init__(message)
        self.index = index
        self.last_good = last_good
        self.partial = list(partial or [])
