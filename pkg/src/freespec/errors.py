"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed polynomial text; ``position`` is the offending 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class StructureError(ValueError):
    """Input polynomial/matrix does not have the structure an operation requires."""


class MemoryBudgetError(RuntimeError):
    """A sparse vector or coefficient table would exceed the amplitude budget."""

    def __init__(self, message: str, requested: int, budget: int):
        super().__init__(message)
        self.requested = requested
        self.budget = budget


class NumericalError(RuntimeError):
    """A dense linear-algebra routine failed to converge or returned non-finite values."""
