"""
Exception hierarchy for the co-prime matrix toolkit.
Every error raised by the library derives from CoprimeToolkitError so the
command-line driver can map failures to exit codes in one place.
"""

from typing import Optional


class CoprimeToolkitError(ValueError):
    """Base class for all toolkit errors."""

    exit_code = 2


class NonSquareError(CoprimeToolkitError):
    """A square matrix was required."""


class SingularMatrixError(CoprimeToolkitError):
    """A nonsingular matrix was required."""


class DimensionMismatchError(CoprimeToolkitError):
    """Operand shapes do not agree."""


class ZeroMatrixError(CoprimeToolkitError):
    """A nonzero matrix was required."""


class EmptyListError(CoprimeToolkitError):
    """An operation that folds over a list received no items."""


class InvalidPermutationError(CoprimeToolkitError):
    """A permutation vector is not a bijection of {1..D}."""


class DuplicateLastElementError(CoprimeToolkitError):
    """Two permutations of a feasible set end in the same element."""


class ToeplitzOddDimensionError(CoprimeToolkitError):
    """The Toeplitz feasible set only exists for even D."""


class InvalidQError(CoprimeToolkitError):
    """Diagonal value q must be an integer greater than 1."""


class NotPairwiseCoprimeError(CoprimeToolkitError):
    """The q list contains two values sharing a factor."""


class NotSortedError(CoprimeToolkitError):
    """The q list is not strictly increasing."""


class NotCoprimeError(CoprimeToolkitError):
    """Two matrix moduli are not left co-prime."""


class InternalMismatchError(CoprimeToolkitError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 1


class MultipleSolutionsError(CoprimeToolkitError):
    """A brute-force CRT scan found more than one matching vector."""

    exit_code = 1


class AmbiguousPeakError(CoprimeToolkitError):
    """Two DFT bins share the maximum magnitude."""


class PeakBelowThresholdError(CoprimeToolkitError):
    """The strongest DFT bin is weaker than the requested threshold."""


class UnsupportedDimensionError(CoprimeToolkitError):
    """Rendering is only available for 2-D moduli."""


class ConfigError(CoprimeToolkitError):
    """Environment or scenario configuration is invalid."""


class ParseError(CoprimeToolkitError):
    """An interchange document could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
