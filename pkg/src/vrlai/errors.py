"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VrlaiError(Exception):
    """Base class for every error raised by this package."""


# numerics
class MaxDepthExceeded(VrlaiError):
    """Adaptive subdivision hit its depth limit before converging."""

    def __init__(self, value: float, err: float, message: str = "") -> None:
        self.value = value
        self.err = err
        super().__init__(message or f"quadrature not converged (best estimate {value!r}, err {err:.3g})")


class DivergentIntegral(VrlaiError, ArithmeticError):
    """A semi-infinite integral does not converge (infinite moment)."""


class TargetOutOfRange(VrlaiError, ValueError):
    """The requested level is not bracketed by the search interval."""


# models
class BadWeights(VrlaiError, ValueError):
    pass


class BadOrder(VrlaiError, ValueError):
    pass


class NoDensity(VrlaiError):
    """The model has atoms, so no density exists."""


class UndefinedAtBreakpoint(VrlaiError, ValueError):
    pass


class UnknownFixture(VrlaiError, KeyError):
    pass


class ModelSpecError(VrlaiError, ValueError):
    """Malformed model-spec document."""


# residual
class DeadSupport(VrlaiError, ValueError):
    """Survival is zero, so residual life is undefined."""


class NonPositiveMrl(VrlaiError, ValueError):
    pass


class SingularReconstruction(VrlaiError):
    """sigma^2 - mu^2 vanishes, the VRL inversion formula is 0/0."""


class InconsistentMoments(VrlaiError):
    """Residual variance came out clearly negative."""


# oracle
class TooFewSurvivors(VrlaiError, ValueError):
    pass
