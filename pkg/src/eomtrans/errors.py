"""Exception types shared across the package."""


class EomtransError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(EomtransError):
    """Invalid or unreadable configuration input."""


class DomainError(EomtransError, ValueError):
    """Inputs outside the domain where a formula is finite/valid."""


class InstabilityError(EomtransError):
    """The linearized dynamical matrix has an eigenvalue with Re >= 0.

    Carries the offending eigenvalue for diagnostics.
    """

    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = eigenvalue
        if message is None:
            message = (
                "unstable configuration: dynamical-matrix eigenvalue "
                f"{eigenvalue!r} has non-negative real part"
            )
        super().__init__(message)


class FitConvergenceError(EomtransError):
    """A least-squares fit failed to converge."""
