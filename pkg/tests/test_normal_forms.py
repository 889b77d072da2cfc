import random

import pytest

from conftest import random_matrix, random_nonsingular
from utils.errors import NonSquareError, SingularMatrixError
from utils.exact_core import IntMatrix, determinant, is_unimodular
from utils.normal_forms import euclid_column_kernel, hermite_normalize, smith_decompose, xgcd


def random_unimodular(rng: random.Random, dim: int, steps: int = 8) -> IntMatrix:
    rows = IntMatrix.identity(dim).to_rows()
    for _ in range(steps):
        i, j = rng.sample(range(dim), 2) if dim > 1 else (0, 0)
        if i == j:
            rows[i] = [-v for v in rows[i]]
            continue
        factor = rng.randint(-3, 3)
        rows[i] = [a + factor * b for a, b in zip(rows[i], rows[j])]
    return IntMatrix.from_rows(rows)


def assert_smith(matrix: IntMatrix) -> None:
    decomposition = smith_decompose(matrix)
    u, s, v = decomposition.U, decomposition.S, decomposition.V
    assert u @ matrix @ v == s
    assert is_unimodular(u) and is_unimodular(v)
    for i in range(s.rows):
        for j in range(s.cols):
            if i != j:
                assert s[i, j] == 0
    diagonal = decomposition.diagonal
    assert all(d >= 0 for d in diagonal)
    nonzero = [d for d in diagonal if d]
    assert diagonal[:len(nonzero)] == tuple(nonzero)
    for a, b in zip(nonzero, nonzero[1:]):
        assert b % a == 0


class TestXgcd:
    def test_bezout(self, rng):
        for _ in range(200):
            a, b = rng.randint(-500, 500), rng.randint(-500, 500)
            g, x, y = xgcd(a, b)
            assert g >= 0
            assert a * x + b * y == g
            if a or b:
                assert a % g == 0 and b % g == 0

    def test_zero(self):
        assert xgcd(0, 0)[0] == 0
        assert xgcd(0, -7)[0] == 7


class TestEuclidColumnKernel:
    @pytest.mark.parametrize("m1,m2", [(4, 6), (-4, 6), (0, 5), (0, -5), (7, 0), (-7, 0), (3, -9), (12, 35)])
    def test_kernel(self, m1, m2):
        g, (w11, w12, w21, w22) = euclid_column_kernel(m1, m2)
        assert m1 * w11 + m2 * w21 == g
        assert m1 * w12 + m2 * w22 == 0
        assert w11 * w22 - w12 * w21 == 1
        assert g == xgcd(m1, m2)[0]


class TestSmith:
    def test_fig1(self, fig1_matrix):
        assert smith_decompose(fig1_matrix).diagonal == (1, 5)

    def test_diagonal_input(self):
        assert smith_decompose(IntMatrix.diagonal([2, 3])).diagonal == (1, 6)
        assert smith_decompose(IntMatrix.diagonal([4, 6])).diagonal == (2, 12)

    def test_zero_matrix(self):
        decomposition = smith_decompose(IntMatrix.zeros(2, 3))
        assert decomposition.diagonal == (0, 0)
        assert decomposition.rank == 0

    def test_stacked_coprime_pair(self):
        stacked = IntMatrix.from_rows([[2, 0], [1, 2]]).hstack(IntMatrix.from_rows([[3, 1], [0, 3]]))
        decomposition = smith_decompose(stacked)
        assert decomposition.S == IntMatrix.identity(2).hstack(IntMatrix.zeros(2, 2))

    @pytest.mark.parametrize("rows,cols", [(1, 1), (2, 2), (3, 3), (4, 4), (2, 4), (3, 6), (3, 2)])
    def test_random_shapes(self, rng, rows, cols):
        for _ in range(25):
            matrix = IntMatrix(rows, cols, tuple(rng.randint(-12, 12) for _ in range(rows * cols)))
            assert_smith(matrix)

    def test_determinant_is_preserved(self, rng):
        for _ in range(30):
            matrix = random_nonsingular(rng, 3, 8)
            product = 1
            for d in smith_decompose(matrix).diagonal:
                product *= d
            assert product == abs(determinant(matrix))


class TestHermite:
    def assert_hermite(self, matrix: IntMatrix) -> IntMatrix:
        h, w = hermite_normalize(matrix)
        assert matrix @ w == h
        assert is_unimodular(w)
        for i in range(h.rows):
            assert h[i, i] > 0
            for k in range(i + 1, h.cols):
                assert h[i, k] == 0
            for k in range(i):
                assert 0 <= h[i, k] < h[i, i]
        return h

    def test_fig1(self, fig1_matrix):
        assert self.assert_hermite(fig1_matrix).to_rows() == [[1, 0], [3, 5]]

    def test_scalar_lattice(self):
        assert self.assert_hermite(IntMatrix.from_rows([[-20, 8], [-8, 4]])) == IntMatrix.scalar(2, 4)

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_canonical_under_unimodular_right_factor(self, rng, dim):
        for _ in range(20):
            matrix = random_nonsingular(rng, dim, 7)
            h = self.assert_hermite(matrix)
            assert self.assert_hermite(matrix @ random_unimodular(rng, dim)) == h

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            hermite_normalize(IntMatrix.from_rows([[1, 2], [2, 4]]))

    def test_non_square(self, rng):
        with pytest.raises(NonSquareError):
            hermite_normalize(random_matrix(rng, 2, 3).hstack(IntMatrix.identity(2)))
