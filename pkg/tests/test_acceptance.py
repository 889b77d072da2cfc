"""
End-to-end properties of constructed families: coprimality, determinants,
lcrm and dynamic range, FPD geometry, CRT reconstruction and the sampling
pipeline. Exhaustive where the parameters allow it.
"""

import itertools
import random
from fractions import Fraction

import pytest

from conftest import random_nonsingular
from utils.exact_core import IntMatrix, determinant
from utils.family_builder import (
    apply_sign_flips,
    commutation_report,
    construct_diagonal_family,
    construct_family,
    family_index,
    generate_feasible_set,
    random_sign_mask,
)
from utils.lattice_fpd import axis_profile, fpd_enumerate, mod_reduce, spread_ratios
from utils.matrix_divisibility import (
    coprimality_sweep,
    lcrm_family,
    lcrm_pair,
    verify_family_lcrm,
)
from utils.md_crt import MdCrtSolver, crt_brute_force, remainders_of
from utils.normal_forms import hermite_normalize
from utils.sampling_sim import HarmonicScene, detect_remainder, estimate_frequency, md_dft, sample_signal

QS = (2, 3, 5, 7)


def family(dim, qs, kind="cyclic"):
    return construct_family(qs, generate_feasible_set(dim, kind))


def heavy(dims):
    return [pytest.param(d, marks=pytest.mark.slow) if d >= 5 else d for d in dims]


COPRIMALITY_CASES = [(d, "cyclic") for d in range(1, 7)] + [(d, "toeplitz") for d in (2, 4, 6)]


class TestCoprimality:
    @pytest.mark.parametrize(
        "dim, kind",
        [pytest.param(d, k, marks=pytest.mark.slow) if d >= 5 else (d, k) for d, k in COPRIMALITY_CASES],
    )
    def test_all_pairs_with_minor_oracle(self, dim, kind):
        members = family(dim, QS, kind)
        report = coprimality_sweep(members, oracle=True)
        assert len(report.verdicts) == len(members) * (len(members) - 1) // 2
        assert report.passed, report.failures


class TestDeterminants:
    @pytest.mark.parametrize("dim", range(1, 7))
    def test_det_is_q_to_the_d(self, dim):
        rng = random.Random(dim)
        for member in family(dim, QS):
            assert determinant(member.matrix) == member.q ** dim
            for _ in range(100):
                flipped = apply_sign_flips(member, random_sign_mask(dim, rng))
                assert abs(determinant(flipped.matrix)) == member.q ** dim


class TestLcrm:
    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_d2_pair_matches_closed_form(self, q):
        index = family_index(family(2, (q,)))
        result = lcrm_pair(index[(1, 1)].matrix, index[(1, 2)].matrix)
        closed_form = IntMatrix.from_rows([[-q ** 4 - q ** 2, q ** 3], [-q ** 3, q ** 2]])
        assert hermite_normalize(result.raw)[0] == hermite_normalize(closed_form)[0]

    def test_d2_full_family(self):
        members = family(2, (2, 3, 5))
        assert lcrm_family([m.matrix for m in members]) == IntMatrix.scalar(2, 30 ** 2)

    @pytest.mark.parametrize("dim", heavy([3, 4, 5, 6]))
    def test_r_d_is_the_lcrm(self, dim):
        report = verify_family_lcrm(family(dim, (2, 3)))
        assert report.passed, report.checks
        assert set(report.checks) == {"crm_integral", "equals_r_d", "det_matches", "minimal"}
        assert report.dynamic_range == 6 ** (dim * dim)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_every_member_is_needed(self, dim):
        members = family(dim, (2, 3))
        full = abs(determinant(lcrm_family([m.matrix for m in members])))
        for index in range(len(members)):
            rest = [m.matrix for k, m in enumerate(members) if k != index]
            assert abs(determinant(lcrm_family(rest))) < full


class TestFpdCardinality:
    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_constructed(self, dim):
        for member in family(dim, (2, 3, 5)):
            smith = fpd_enumerate(member.matrix, "smith")
            assert len(smith) == member.q ** dim
            assert smith.points == fpd_enumerate(member.matrix, "bbox").points

    @pytest.mark.parametrize(
        "rows, size",
        [([[2, 3], [1, 4]], 5), ([[3, 0], [1, 3]], 9), ([[9, 0], [0, 1]], 9)],
    )
    def test_worked_examples(self, rows, size):
        matrix = IntMatrix.from_rows(rows)
        assert len(fpd_enumerate(matrix, "smith")) == size
        assert fpd_enumerate(matrix, "smith").points == fpd_enumerate(matrix, "bbox").points

    def test_random_matrices(self, rng):
        cases = [random_nonsingular(rng, 2, 20, max_det=2000) for _ in range(150)]
        cases += [random_nonsingular(rng, 3, 4, max_det=2000) for _ in range(50)]
        for matrix in cases:
            smith = fpd_enumerate(matrix, "smith")
            assert len(smith) == abs(determinant(matrix))
            assert smith.points == fpd_enumerate(matrix, "bbox").points


class TestAxisExtents:
    @pytest.mark.parametrize("dim", [2, 3])
    def test_constructed_stay_within_q(self, dim):
        for member in family(dim, (2, 3, 5)):
            fpd = fpd_enumerate(member.matrix)
            for axis in range(dim):
                profile = axis_profile(member.matrix, axis, fpd)
                assert 0 <= profile.minimum and profile.maximum <= member.q
                assert profile.distinct_count <= member.q + 1

    def test_q3_example(self):
        member = family_index(family(2, (3,)))[(1, 1)]
        assert max(axis_profile(member.matrix, axis).distinct_count for axis in range(2)) == 4

    @pytest.mark.parametrize("dim", [2, 3])
    def test_diagonal_reach_q_to_the_d(self, dim):
        for member in construct_diagonal_family((2, 3), dim):
            assert axis_profile(member.matrix, member.j - 1).distinct_count == member.q ** dim


class TestSpread:
    @pytest.mark.parametrize("dim", [2, 3, 4, 5])
    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_closed_forms(self, dim, q):
        constructed = family(dim, (q,))[0]
        diagonal = construct_diagonal_family((q,), dim)[0]
        assert spread_ratios(constructed.matrix).peak_over_mean == Fraction(dim * dim * q, dim * q + dim - 1)
        assert spread_ratios(diagonal.matrix).peak_over_mean == Fraction(dim * dim * q ** dim, q ** dim + dim - 1)


class TestCrt:
    def test_d2_exhaustive(self):
        moduli = [m.matrix for m in family(2, (2, 3))]
        solver = MdCrtSolver(moduli)
        points = fpd_enumerate(solver.modulus).points
        assert len(points) == 1296
        for point in points:
            assert solver.solve([r.r for r in remainders_of(point, moduli)]).r == point

    def test_d2_matches_brute_force(self, rng):
        moduli = [m.matrix for m in family(2, (2, 3))]
        solver = MdCrtSolver(moduli)
        for _ in range(25):
            residues = remainders_of((rng.randrange(36), rng.randrange(36)), moduli)
            assert solver.solve([r.r for r in residues]).r == crt_brute_force(residues, solver.modulus)

    def test_d4_random(self, rng):
        moduli = [m.matrix for m in family(4, (2, 3))]
        solver = MdCrtSolver(moduli)
        assert solver.modulus == IntMatrix.scalar(4, 1296)
        for _ in range(1000):
            point = tuple(rng.randrange(1296) for _ in range(4))
            assert solver.solve([r.r for r in remainders_of(point, moduli)]).r == point


class TestSamplingPipeline:
    def test_noiseless_detection(self, rng):
        amplitude = 0.8 - 0.3j
        cases = [(random_nonsingular(rng, 2, 8, max_det=100), 2) for _ in range(400)]
        cases += [(random_nonsingular(rng, 3, 3, max_det=60), 3) for _ in range(100)]
        for modulus, dim in cases:
            f = tuple(rng.randint(-10 ** 6, 10 ** 6) for _ in range(dim))
            samples = sample_signal(HarmonicScene(amplitude, f), modulus)
            expected = mod_reduce(f, modulus)[1].r
            assert detect_remainder(samples, modulus).r == expected
            _, peak = md_dft(samples, modulus).peak()
            assert peak == pytest.approx(abs(amplitude) * abs(determinant(modulus)), rel=1e-9)

    def test_end_to_end_d2(self, rng):
        members = family(2, (2, 3))
        targets = [(0, 0), (35, 35), (17, 29)] + [(rng.randrange(36), rng.randrange(36)) for _ in range(30)]
        for f in targets:
            assert estimate_frequency(HarmonicScene(1.0, f), members).f_hat == f

    @pytest.mark.slow
    def test_end_to_end_d4(self):
        members = family(4, (2, 3))
        for seed in range(100):
            rng = random.Random(seed)
            f = tuple(rng.randrange(1296) for _ in range(4))
            assert estimate_frequency(HarmonicScene(1.0, f, rng_seed=seed), members).f_hat == f


class TestCommutation:
    @pytest.mark.parametrize("dim", range(2, 7))
    def test_same_index_commute_and_cross_index_do_not(self, dim):
        report = commutation_report(family(dim, (2, 3, 5)))
        assert report.same_index_commute
        assert report.witness is not None
        assert report.passed

    def test_d4_explicit_products(self):
        index = family_index(family(4, (2, 3)))
        for j in range(1, 5):
            a, b = index[(1, j)].matrix, index[(2, j)].matrix
            assert a @ b == b @ a
        assert any(
            index[(1, j1)].matrix @ index[(2, j2)].matrix != index[(2, j2)].matrix @ index[(1, j1)].matrix
            for j1, j2 in itertools.permutations(range(1, 5), 2)
        )

