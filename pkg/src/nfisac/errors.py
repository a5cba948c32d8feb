"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateTargetError(ValueError):
    """Target reflection coefficient is zero; the information matrix would be singular."""


class SingularInformationError(ArithmeticError):
    """An information matrix block is numerically singular."""


class UnidentifiableParametersError(ArithmeticError):
    """The reduced information matrix is singular; the bound does not exist."""


class ScenarioInfeasibleError(RuntimeError):
    """No beamformer satisfies the scenario constraints."""

    def __init__(self, message, violated=None):
        super().__init__(message)
        self.violated = violated


class RankViolationError(RuntimeError):
    """A lifted covariance is too far from rank one to extract a beamformer."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroDirectionError(ValueError):
    """A projection direction vanished; no meaningful update exists."""
