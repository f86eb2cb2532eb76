class DomainError(ValueError):
    """Parameter outside the region where a quantity is defined."""


class DegenerateBlockError(ValueError):
    """A loss block with zero probability was asked for a state-dependent quantity."""


class NumericalQualityError(RuntimeError):
    """A numerical procedure did not reach its stated accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DenseBudgetError(ValueError):
    """Dense oracle requested above its photon-number budget."""
