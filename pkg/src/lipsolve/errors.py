"""Exception types shared across the solver toolkit."""


class LipError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(LipError):
    """Vector length does not match the operator's expected dimension."""


class ZeroGradient(LipError):
    """Linear minimization oracle called with an all-zero gradient."""


class SingularSystem(LipError):
    """Least squares system is numerically rank deficient beyond tolerance."""


class NotInCone(LipError):
    """Point lies outside the feasibility cone."""


class BoundaryOfCone(LipError):
    """Point lies on (or numerically at) the cone boundary where the
    objective is not differentiable."""


class NotInLambda(LipError):
    """Dual point violates the positivity condition of the dual domain."""


class InvalidBounds(LipError):
    """Inconsistent problem or regularity parameters."""


class Infeasible(LipError):
    """No signal satisfies the residual constraint strictly."""


class DegenerateDirection(LipError):
    """Search direction is annihilated by the measurement operator."""


class StepSizeViolation(LipError):
    """Primal/dual step sizes violate the stability condition."""


class ConeViolation(LipError):
    """An iterate left the feasibility cone; the step size must shrink."""
