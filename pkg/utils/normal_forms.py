"""
Normal Forms Module
Smith normal form with unimodular transform tracking, and the column-style
Hermite normal form used as the canonical representative of a matrix up to
right multiplication by unimodular matrices.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from utils.errors import NonSquareError, SingularMatrixError
from utils.exact_core import IntMatrix, determinant

logger = logging.getLogger(__name__)


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """
    Extended Euclid.

    Returns:
        (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g
    """
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r != 0:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_x, x = x, old_x - quotient * x
        old_y, y = y, old_y - quotient * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def euclid_column_kernel(m1: int, m2: int) -> Tuple[int, Tuple[int, int, int, int]]:
    """
    Unimodular 2x2 column transform taking (m1 m2) to (g 0).

    This is the elementary-column Euclidean step: for [m1*e_i  m2*e_i] the
    same transform yields [g*e_i  0] with g = gcd(m1, m2).

    Returns:
        (g, (w11, w12, w21, w22)) with (m1 m2) @ [[w11, w12], [w21, w22]] = (g 0)
        and w11*w22 - w12*w21 = 1
    """
    if m2 == 0:
        if m1 < 0:
            # negating column 1 and column 2 keeps the determinant at 1
            return -m1, (-1, 0, 0, -1)
        return m1, (1, 0, 0, 1)
    g, x, y = xgcd(m1, m2)
    return g, (x, -m2 // g, y, m1 // g)


@dataclass(frozen=True)
class SmithDecomposition:
    """U @ A @ V = S with U, V unimodular and S diagonal with s_k | s_{k+1}."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.S[k, k] for k in range(min(self.S.rows, self.S.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for s in self.diagonal if s != 0)


class SmithReducer:
    """
    Reduces an integer matrix to Smith normal form while recording the row
    transform U and the column transform V.

    Pivot choice is the smallest nonzero absolute value in the remaining
    submatrix, which keeps entry growth small.
    """

    def __init__(self, matrix: IntMatrix):
        self.rows = matrix.rows
        self.cols = matrix.cols
        self.a = matrix.to_rows()
        self.u = IntMatrix.identity(self.rows).to_rows()
        self.v = IntMatrix.identity(self.cols).to_rows()

    # Elementary operations, mirrored onto U (rows) and V (columns).

    def _swap_rows(self, i: int, j: int) -> None:
        if i != j:
            self.a[i], self.a[j] = self.a[j], self.a[i]
            self.u[i], self.u[j] = self.u[j], self.u[i]

    def _swap_cols(self, i: int, j: int) -> None:
        if i != j:
            for row in self.a:
                row[i], row[j] = row[j], row[i]
            for row in self.v:
                row[i], row[j] = row[j], row[i]

    def _add_row(self, target: int, source: int, factor: int) -> None:
        """row_target += factor * row_source"""
        for block in (self.a, self.u):
            block[target] = [x + factor * y for x, y in zip(block[target], block[source])]

    def _add_col(self, target: int, source: int, factor: int) -> None:
        """col_target += factor * col_source"""
        for block in (self.a, self.v):
            for row in block:
                row[target] += factor * row[source]

    def _negate_col(self, j: int) -> None:
        for block in (self.a, self.v):
            for row in block:
                row[j] = -row[j]

    def _smallest_pivot(self, t: int) -> Optional[Tuple[int, int]]:
        best = None
        for i in range(t, self.rows):
            for j in range(t, self.cols):
                value = self.a[i][j]
                if value != 0 and (best is None or abs(value) < abs(self.a[best[0]][best[1]])):
                    best = (i, j)
        return best

    def _clear_cross(self, t: int) -> bool:
        """Reduce row t and column t against the pivot; True once both are clear."""
        pivot = self.a[t][t]
        clear = True
        for i in range(t + 1, self.rows):
            if self.a[i][t] != 0:
                self._add_row(i, t, -(self.a[i][t] // pivot))
                clear = clear and self.a[i][t] == 0
        for j in range(t + 1, self.cols):
            if self.a[t][j] != 0:
                self._add_col(j, t, -(self.a[t][j] // pivot))
                clear = clear and self.a[t][j] == 0
        return clear

    def _find_non_divisible(self, t: int) -> Optional[int]:
        pivot = self.a[t][t]
        for i in range(t + 1, self.rows):
            for j in range(t + 1, self.cols):
                if self.a[i][j] % pivot != 0:
                    return i
        return None

    def run(self) -> SmithDecomposition:
        for t in range(min(self.rows, self.cols)):
            while True:
                position = self._smallest_pivot(t)
                if position is None:
                    break
                self._swap_rows(t, position[0])
                self._swap_cols(t, position[1])
                if not self._clear_cross(t):
                    continue
                offender = self._find_non_divisible(t)
                if offender is None:
                    break
                # pull the offending row up so the next pass shrinks the pivot
                self._add_row(t, offender, 1)
            if self.a[t][t] < 0:
                self._negate_col(t)
            logger.debug(f"Smith pivot {t}: {self.a[t][t]}")

        return SmithDecomposition(
            U=IntMatrix.from_rows(self.u),
            S=IntMatrix.from_rows(self.a),
            V=IntMatrix.from_rows(self.v),
        )


def smith_decompose(matrix: IntMatrix) -> SmithDecomposition:
    """
    Smith normal form of any integer matrix.

    Args:
        matrix: Integer matrix, rectangular allowed

    Returns:
        SmithDecomposition with U @ matrix @ V == S
    """
    return SmithReducer(matrix).run()


def hermite_normalize(matrix: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """
    Column-style Hermite normal form of a nonsingular square matrix.

    Column operations bring the matrix to lower-triangular H with a positive
    diagonal and every entry left of the diagonal reduced into [0, h_ii).
    H depends only on the lattice spanned by the columns, so it is the
    canonical representative of matrix @ W over all unimodular W.

    Returns:
        (H, W) with matrix @ W == H and W unimodular

    Raises:
        NonSquareError, SingularMatrixError
    """
    if not matrix.is_square:
        raise NonSquareError(f"Expected a square matrix, got {matrix.rows}x{matrix.cols}")
    if determinant(matrix) == 0:
        raise SingularMatrixError("Hermite normalization needs a nonsingular matrix")

    n = matrix.rows
    a: List[List[int]] = matrix.to_rows()
    w: List[List[int]] = IntMatrix.identity(n).to_rows()

    def combine(i: int, j: int, w11: int, w12: int, w21: int, w22: int) -> None:
        for block in (a, w):
            for row in block:
                x, y = row[i], row[j]
                row[i] = x * w11 + y * w21
                row[j] = x * w12 + y * w22

    def add_col(target: int, source: int, factor: int) -> None:
        for block in (a, w):
            for row in block:
                row[target] += factor * row[source]

    for i in range(n):
        for j in range(i + 1, n):
            if a[i][j] != 0:
                _, transform = euclid_column_kernel(a[i][i], a[i][j])
                combine(i, j, *transform)
        if a[i][i] < 0:
            for block in (a, w):
                for row in block:
                    row[i] = -row[i]
        for k in range(i):
            factor = a[i][k] // a[i][i]
            if factor:
                add_col(k, i, -factor)

    return IntMatrix.from_rows(a), IntMatrix.from_rows(w)
