"""
Lattice FPD Module
Fundamental parallelepiped enumeration, division with remainder modulo an
integer matrix, per-axis extents of an FPD and entry spread ratios.
All membership tests are exact; there is no tolerance anywhere.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import FrozenSet, List, Optional, Sequence, Tuple

from utils.errors import DimensionMismatchError, InternalMismatchError, SingularMatrixError, ZeroMatrixError
from utils.exact_core import (
    IntMatrix,
    RatMatrix,
    Vector,
    determinant,
    integer_inverse,
    inverse_rational,
    require_nonsingular,
)
from utils.normal_forms import smith_decompose

logger = logging.getLogger(__name__)

FPD_METHODS = ("smith", "bbox")


def _inverse(modulus: IntMatrix) -> RatMatrix:
    require_nonsingular(modulus)
    return inverse_rational(modulus)


def _in_unit_cube(coordinates: Sequence[Fraction]) -> bool:
    return all(0 <= x < 1 for x in coordinates)


def is_in_fpd(point: Sequence[int], modulus: IntMatrix) -> bool:
    """True when modulus^-1 @ point lies in [0, 1)^D."""
    return _in_unit_cube(_inverse(modulus).apply(point))


@dataclass(frozen=True)
class Residue:
    """An integer vector remainder r in FPD(modulus)."""

    r: Vector
    modulus: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        if len(self.r) != self.modulus.rows:
            raise DimensionMismatchError(f"Remainder of length {len(self.r)} does not fit a {self.modulus.rows}-D modulus")
        if not is_in_fpd(self.r, self.modulus):
            raise DimensionMismatchError(f"{self.r} is not in the FPD of its modulus")


@dataclass(frozen=True)
class Fpd:
    """The integer points of modulus @ [0, 1)^D, sorted lexicographically."""

    modulus: IntMatrix
    points: Tuple[Vector, ...]

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def point_set(self) -> FrozenSet[Vector]:
        return frozenset(self.points)

    def __contains__(self, point) -> bool:
        return tuple(point) in self.point_set


class ModReducer:
    """mod_reduce against one modulus, with the inverse computed once."""

    def __init__(self, modulus: IntMatrix):
        self.modulus = modulus
        self.inverse = _inverse(modulus)

    def reduce(self, f: Sequence[int]) -> Tuple[Vector, Vector]:
        x = self.inverse.apply(f)
        n = tuple(math.floor(v) for v in x)
        mn = self.modulus.apply(n)
        r = tuple(a - b for a, b in zip(f, mn))
        return n, r


def mod_reduce(f: Sequence[int], modulus: IntMatrix) -> Tuple[Vector, Residue]:
    """
    Division with remainder: f = modulus @ n + r with r in FPD(modulus).

    n is the componentwise floor (toward -inf) of modulus^-1 @ f.

    Returns:
        (n, Residue(r, modulus))
    """
    f = tuple(int(v) for v in f)
    if len(f) != modulus.cols:
        raise DimensionMismatchError(f"Vector of length {len(f)} does not fit a {modulus.rows}-D modulus")
    n, r = ModReducer(modulus).reduce(f)
    return n, Residue(r, modulus)


def fpd_vertices(modulus: IntMatrix) -> List[Vector]:
    """Images modulus @ v of the 2^D vertices v of the unit cube."""
    return [modulus.apply(v) for v in itertools.product((0, 1), repeat=modulus.cols)]


def _enumerate_smith(modulus: IntMatrix) -> List[Vector]:
    # x == x' mod M iff S^-1 U (x - x') is integral, so U^-1 y over the box
    # prod [0, s_k) walks every coset exactly once.
    decomposition = smith_decompose(modulus)
    u_inverse = integer_inverse(decomposition.U)
    reducer = ModReducer(modulus)
    radices = [range(s) for s in decomposition.diagonal]
    return [reducer.reduce(u_inverse.apply(y))[1] for y in itertools.product(*radices)]


def _enumerate_bbox(modulus: IntMatrix) -> List[Vector]:
    inverse = _inverse(modulus)
    vertices = fpd_vertices(modulus)
    bounds = [range(min(v[k] for v in vertices), max(v[k] for v in vertices) + 1) for k in range(modulus.rows)]
    return [point for point in itertools.product(*bounds) if _in_unit_cube(inverse.apply(point))]


def fpd_enumerate(modulus: IntMatrix, method: str = "smith") -> Fpd:
    """
    Enumerate FPD(modulus).

    Args:
        modulus: Nonsingular square integer matrix
        method: 'smith' walks the |det| coset representatives of the Smith
            decomposition; 'bbox' scans the vertex bounding box with exact
            membership tests (the oracle)

    Returns:
        Fpd with exactly |det modulus| sorted points
    """
    if not modulus.is_square:
        raise DimensionMismatchError(f"Modulus must be square, got {modulus.rows}x{modulus.cols}")
    det = determinant(modulus)
    if det == 0:
        raise SingularMatrixError("Modulus must be nonsingular")

    if method == "smith":
        points = _enumerate_smith(modulus)
    elif method == "bbox":
        points = _enumerate_bbox(modulus)
    else:
        raise ValueError(f"Unknown FPD method: {method}")

    points = sorted(set(points))
    if len(points) != abs(det):
        raise InternalMismatchError(f"FPD has {len(points)} points but |det| = {abs(det)}")
    logger.debug(f"FPD of size {len(points)} enumerated by {method}")
    return Fpd(modulus=modulus, points=tuple(points))


@dataclass(frozen=True)
class AxisProfile:
    minimum: int
    maximum: int
    distinct_count: int


def axis_profile(modulus: IntMatrix, axis: int, fpd: Optional[Fpd] = None) -> AxisProfile:
    """Extent of FPD(modulus) along a 0-based coordinate axis."""
    if not 0 <= axis < modulus.rows:
        raise DimensionMismatchError(f"Axis {axis} out of range for dimension {modulus.rows}")
    if fpd is None:
        fpd = fpd_enumerate(modulus)
    values = {point[axis] for point in fpd.points}
    return AxisProfile(minimum=min(values), maximum=max(values), distinct_count=len(values))


@dataclass(frozen=True)
class SpreadRatios:
    peak_over_mean: Fraction
    peak_over_min_nonzero: Fraction


def spread_ratios(matrix: IntMatrix) -> SpreadRatios:
    """Peak |entry| over the mean |entry| and over the smallest nonzero |entry|."""
    if matrix.is_zero():
        raise ZeroMatrixError("Spread ratios need a nonzero matrix")
    magnitudes = [abs(v) for v in matrix.entries]
    peak = max(magnitudes)
    return SpreadRatios(
        peak_over_mean=Fraction(len(magnitudes) * peak, sum(magnitudes)),
        peak_over_min_nonzero=Fraction(peak, min(v for v in magnitudes if v)),
    )
