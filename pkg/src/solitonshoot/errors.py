"""Exception types shared across the toolkit."""


class SolitonShootError(Exception):
    """Base class for toolkit errors."""


class DomainError(SolitonShootError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConversionError(SolitonShootError, ValueError):
    """Chart conversion requested outside its validity region (xi <= 0)."""


class ReconstructionError(SolitonShootError, ValueError):
    """Metric reconstruction attempted on a degenerate (R_i <= 0) state."""


class GridError(SolitonShootError, ValueError):
    """Sample grid unsuitable for the finite-difference residual oracle."""


class SearchError(SolitonShootError, RuntimeError):
    """Critical-parameter search failed (e.g. no sign change on the arc)."""
