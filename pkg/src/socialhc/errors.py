"""Exception hierarchy shared by the engines."""


class SocialHCError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SocialHCError, ValueError):
    """Invalid parameters (node count, side length, q, gamma, ...)."""


class DegeneratePairError(SocialHCError, ValueError):
    """Two nodes at zero distance where a distance is actually used."""


class EmptyCellError(SocialHCError):
    """A routing cell contains no node.

    The offending cell (column, row) is available as ``cell``.
    """

    def __init__(self, cell, message=None):
        self.cell = tuple(cell)
        super().__init__(message or f"routing cell {self.cell} contains no node")


class ClusterSizeError(SocialHCError):
    """A subnetwork holds fewer nodes than two clusters of the requested size."""


class NumericError(SocialHCError, ArithmeticError):
    """Non-finite values reached a numerical kernel."""


class RangeError(SocialHCError, ValueError):
    """A scaling parameter lies outside the admissible range of a formula."""


class DomainError(SocialHCError, ValueError):
    """Input outside the mathematical domain of a function (e.g. log of <= 0)."""
