"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(RuntimeError):
    """A request exceeds a configured size cap."""


class FitError(ValueError):
    """Quasi-polynomial fitting failed: too few points or a held-out mismatch."""
