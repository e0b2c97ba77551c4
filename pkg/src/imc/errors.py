"""Exception hierarchy."""


class IMCError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(IMCError, ValueError):
    """Objects defined on different state spaces were combined."""


class ModelError(IMCError, ValueError):
    """An uncertainty model or chain violates its invariants."""


class InfeasibleError(ModelError):
    """A constraint system has no mass function satisfying it.

    ``subset`` holds the indices of an irreducible infeasible subset of the
    halfspace constraints (together with the simplex itself).
    """

    def __init__(self, message, subset=()):
        super().__init__(message)
        self.subset = tuple(subset)


class SizeCapError(IMCError):
    """A combinatorial enumeration would exceed its configured cap."""


class ConvergenceError(IMCError):
    """An iteration broke one of its own monotonicity guarantees."""
