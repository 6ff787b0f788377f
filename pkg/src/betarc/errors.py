"""Exception types shared across the package."""


class BetarcError(Exception):
    """Base class for betarc errors."""


class DataError(BetarcError):
    """Input data violates a contract (bad CSV, y outside (0,1), shape mismatch)."""


class NumericalError(BetarcError):
    """A numerical procedure failed (singular Hessian, divergent optimization)."""
