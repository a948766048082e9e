"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed input: bad shapes, labels, headers, non-Hermitian matrices."""


class DomainError(ValueError):
    """Arguments outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, step underflow)."""
