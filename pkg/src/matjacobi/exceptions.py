"""Typed errors for degenerate numerical situations."""


class NumericDegeneracy(Exception):
    """Base class for failures where the requested object ceases to exist.

    Raised instead of returning garbage whenever an inversion, square root
    or log-determinant is requested of a matrix whose spectrum sits at or
    below the positive-definiteness floor.
    """


class SpectrumOutOfDomain(NumericDegeneracy):
    """A scalar function was applied to a matrix outside its domain.

    Signals loss of positive definiteness upstream (e.g. asking for the
    square root or logarithm of a matrix with an eigenvalue at or below
    the floor).
    """


class TrivialityBreakdown(NumericDegeneracy):
    """Gram-Schmidt produced a norm matrix that is not positive definite.

    The measure is too degenerate for the requested depth.  ``index`` is
    the first failing polynomial degree.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"norm matrix gamma_{index} is not positive definite")


class BoundaryDegeneracy(NumericDegeneracy):
    """Canonical-moment bookkeeping lost definiteness at some index.

    Happens when the measure carries mass at 0 or 1, or is trivial beyond
    the requested length; the canonical moments simply do not exist there.
    ``index`` is the canonical index k of the failing quantity.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"canonical bookkeeping degenerate at index {index}")
