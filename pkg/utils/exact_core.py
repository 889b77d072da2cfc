"""
Exact Matrix Arithmetic Module
Dense integer and rational matrices with arbitrary-precision entries,
fraction-free determinants, exact inverses and unimodularity tests.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, List, Sequence, Tuple, Union

from utils.errors import DimensionMismatchError, NonSquareError, SingularMatrixError

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


@dataclass(frozen=True)
class IntMatrix:
    """
    Immutable dense matrix of Python integers stored row-major.

    Vectors are plain integer tuples; apply() multiplies one on the right.
    """

    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise DimensionMismatchError(f"Matrix dimensions must be positive, got {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(
                f"Expected {self.rows * self.cols} entries for a {self.rows}x{self.cols} matrix, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        """Build a matrix from a list of equally long integer rows."""
        if not rows or not rows[0]:
            raise DimensionMismatchError("Matrix needs at least one row and one column")
        width = len(rows[0])
        for row in rows:
            if len(row) != width:
                raise DimensionMismatchError("Rows have different lengths")
        return cls(len(rows), width, tuple(int(v) for row in rows for v in row))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.scalar(n, 1)

    @classmethod
    def scalar(cls, n: int, value: int) -> "IntMatrix":
        return cls(n, n, tuple(value if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Vector:
        return self.entries[j::self.cols]

    def to_rows(self) -> List[List[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        """The block matrix (self other)."""
        if self.rows != other.rows:
            raise DimensionMismatchError(f"Cannot stack {self.shape} beside {other.shape}")
        return IntMatrix.from_rows([list(self.row(i)) + list(other.row(i)) for i in range(self.rows)])

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "IntMatrix":
        rows, cols = list(rows), list(cols)
        return IntMatrix.from_rows([[self[i, j] for j in cols] for i in rows])

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(k * v for v in self.entries))

    def apply(self, vector: Sequence[int]) -> Vector:
        """Matrix-vector product for an integer vector."""
        if len(vector) != self.cols:
            raise DimensionMismatchError(f"Vector of length {len(vector)} does not fit {self.shape}")
        return tuple(sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def max_abs(self) -> int:
        return max(abs(v) for v in self.entries)

    def _check_same_shape(self, other: "IntMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionMismatchError(f"Shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def __mul__(self, k: int) -> "IntMatrix":
        return self.scale(k)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            return RatMatrix.from_int(self) @ other
        if self.cols != other.rows:
            raise DimensionMismatchError(f"Cannot multiply {self.shape} by {other.shape}")
        other_cols = [other.col(j) for j in range(other.cols)]
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(
                sum(a * b for a, b in zip(self.row(i), column))
                for i in range(self.rows)
                for column in other_cols
            ),
        )

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in self.row(i)) for i in range(self.rows))


@dataclass(frozen=True)
class RatMatrix:
    """
    Immutable dense matrix of exact rationals.

    Entries are fractions.Fraction, which reduce to lowest terms with a
    positive denominator on construction.
    """

    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError(f"Expected {self.rows * self.cols} entries, got {len(self.entries)}")
        object.__setattr__(self, "entries", tuple(Fraction(v) for v in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Union[int, Fraction]]]) -> "RatMatrix":
        return cls(len(rows), len(rows[0]), tuple(Fraction(v) for row in rows for v in row))

    @classmethod
    def from_int(cls, matrix: IntMatrix) -> "RatMatrix":
        return cls(matrix.rows, matrix.cols, tuple(Fraction(v) for v in matrix.entries))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls.from_int(IntMatrix.identity(n))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> Tuple[Fraction, ...]:
        return self.entries[j::self.cols]

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries)

    def to_int(self) -> IntMatrix:
        """Convert to an IntMatrix; raises if any entry is fractional."""
        if not self.is_integral():
            raise DimensionMismatchError("Matrix has non-integer entries")
        return IntMatrix(self.rows, self.cols, tuple(v.numerator for v in self.entries))

    def denominator_lcm(self) -> int:
        """lcm of the denominators of all entries."""
        return lcm(*(v.denominator for v in self.entries))

    def scale(self, k: Union[int, Fraction]) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, tuple(k * v for v in self.entries))

    def apply(self, vector: Sequence[Union[int, Fraction]]) -> Tuple[Fraction, ...]:
        if len(vector) != self.cols:
            raise DimensionMismatchError(f"Vector of length {len(vector)} does not fit {self.shape}")
        return tuple(sum((a * b for a, b in zip(self.row(i), vector)), Fraction(0)) for i in range(self.rows))

    def __matmul__(self, other) -> "RatMatrix":
        if isinstance(other, IntMatrix):
            other = RatMatrix.from_int(other)
        if self.cols != other.rows:
            raise DimensionMismatchError(f"Cannot multiply {self.shape} by {other.shape}")
        other_cols = [other.col(j) for j in range(other.cols)]
        return RatMatrix(
            self.rows,
            other.cols,
            tuple(
                sum((a * b for a, b in zip(self.row(i), column)), Fraction(0))
                for i in range(self.rows)
                for column in other_cols
            ),
        )

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in self.row(i)) for i in range(self.rows))


def _require_square(matrix: IntMatrix) -> None:
    if not matrix.is_square:
        raise NonSquareError(f"Expected a square matrix, got {matrix.rows}x{matrix.cols}")


def determinant(matrix: IntMatrix) -> int:
    """
    Exact determinant by Bareiss fraction-free elimination.

    Pivots are the first nonzero entry in column order; each row swap flips
    the sign. Every intermediate division is exact.
    """
    _require_square(matrix)
    n = matrix.rows
    a = matrix.to_rows()
    sign = 1
    previous = 1

    for k in range(n - 1):
        if a[k][k] == 0:
            pivot_row = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot_row is None:
                return 0
            a[k], a[pivot_row] = a[pivot_row], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // previous
        previous = a[k][k]

    return sign * a[n - 1][n - 1]


def cofactor_determinant(matrix: IntMatrix) -> int:
    """Laplace expansion along the first row; exponential, kept as an oracle for small dims."""
    _require_square(matrix)
    n = matrix.rows
    if n == 1:
        return matrix[0, 0]
    if n == 2:
        return matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
    total = 0
    for j in range(n):
        if matrix[0, j] == 0:
            continue
        minor = matrix.submatrix(range(1, n), [c for c in range(n) if c != j])
        total += (-1) ** j * matrix[0, j] * cofactor_determinant(minor)
    return total


def permutation_determinant(matrix: IntMatrix) -> int:
    """Leibniz sum over all permutations, the textbook oracle for dim <= 4."""
    _require_square(matrix)
    n = matrix.rows
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        product = 1
        for i, p in enumerate(perm):
            product *= matrix[i, p]
        total += -product if inversions % 2 else product
    return total


def inverse_rational(matrix: IntMatrix) -> RatMatrix:
    """
    Exact inverse over the rationals by Gauss-Jordan elimination.

    Args:
        matrix: Square nonsingular integer matrix

    Returns:
        RatMatrix X with matrix @ X equal to the identity

    Raises:
        NonSquareError, SingularMatrixError
    """
    _require_square(matrix)
    n = matrix.rows
    a = [[Fraction(v) for v in matrix.row(i)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    for k in range(n):
        pivot_row = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError("Matrix is singular and has no inverse")
        a[k], a[pivot_row] = a[pivot_row], a[k]
        pivot = a[k][k]
        a[k] = [v / pivot for v in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                factor = a[i][k]
                a[i] = [x - factor * y for x, y in zip(a[i], a[k])]

    return RatMatrix.from_rows([row[n:] for row in a])


def integer_inverse(matrix: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular matrix, as an integer matrix."""
    inverse = inverse_rational(matrix)
    if not inverse.is_integral():
        raise SingularMatrixError("Matrix is not unimodular; its inverse is not integral")
    return inverse.to_int()


def is_unimodular(matrix: IntMatrix) -> bool:
    """True iff the determinant is 1 or -1."""
    return abs(determinant(matrix)) == 1


def require_nonsingular(matrix: IntMatrix) -> int:
    """Return the determinant, raising SingularMatrixError when it is zero."""
    det = determinant(matrix)
    if det == 0:
        raise SingularMatrixError("Matrix is singular")
    return det


def left_divides(divisor: IntMatrix, matrix: IntMatrix) -> bool:
    """True when divisor^-1 @ matrix is an integer matrix."""
    return (inverse_rational(divisor) @ matrix).is_integral()
