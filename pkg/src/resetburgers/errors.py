"""Exception types shared across the package."""


class ResetBurgersError(Exception):
    """Base class for all package errors."""


class InvalidGridSize(ResetBurgersError):
    """Grid size is not a power of two >= 8."""


class NonFiniteSample(ResetBurgersError):
    """A sampled function value is NaN or infinite."""


class InvalidConfig(ResetBurgersError):
    """A run or driver configuration violates a precondition."""


class NearSingularMap(ResetBurgersError):
    """Flow map Jacobian at or below the shock threshold; inversion refused."""

    def __init__(self, min_jac: float, eps_jac: float):
        super().__init__(f"min Jacobian {min_jac:.3e} <= eps_jac {eps_jac:.3e}")
        self.min_jac = min_jac
        self.eps_jac = eps_jac


class CFLViolation(ResetBurgersError):
    """Time step too large for the explicit advective term."""


class NonZeroMean(ResetBurgersError):
    """Initial data must be mean-zero for the log-transform oracle."""


class NoShock(ResetBurgersError):
    """Initial data is non-decreasing; characteristics never cross."""


class InsufficientSurvivors(ResetBurgersError):
    """Too few realizations completed to form a trustworthy mean."""


class DegenerateFit(ResetBurgersError):
    """Log-log fit impossible (too few points or nonpositive values)."""


class ParseError(ResetBurgersError):
    """Config document is malformed."""


class ValidationError(ResetBurgersError):
    """Config parsed but violates an invariant."""
