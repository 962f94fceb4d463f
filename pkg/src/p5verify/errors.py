"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the region where a formula is defined."""


class InvalidPointError(ValueError):
    """A vector is not a valid ordered simplex point."""


class ProofGapError(AssertionError):
    """A branch the case analysis marks as contradictory was reached."""


class PrecisionExhaustedError(ArithmeticError):
    """Directed-rounding certification failed at the highest precision tried."""


class ResourceLimitError(RuntimeError):
    """A request exceeds a configured table or memory capacity."""
