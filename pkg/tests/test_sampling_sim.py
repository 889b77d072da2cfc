import logging

import numpy as np
import pytest

from conftest import random_nonsingular
from utils.errors import (
    AmbiguousPeakError,
    ConfigError,
    DimensionMismatchError,
    PeakBelowThresholdError,
    SingularMatrixError,
)
from utils.exact_core import IntMatrix, determinant
from utils.family_builder import construct_family, generate_feasible_set
from utils.lattice_fpd import fpd_enumerate, mod_reduce
from utils.sampling_sim import (
    HarmonicScene,
    SampleGrid,
    detect_remainder,
    estimate_frequency,
    md_dft,
    run_noise_trials,
    sample_signal,
)

NONSEPARABLE = IntMatrix.from_rows([[3, 0], [1, 3]])
AMPLITUDE = 1.0 + 0.5j


@pytest.fixture
def d2_family():
    return construct_family((2, 3), generate_feasible_set(2))


class TestSampleSignal:
    def test_zero_frequency_is_constant(self):
        samples = sample_signal(HarmonicScene(AMPLITUDE, (0, 0)), NONSEPARABLE)
        assert len(samples.indices) == 9
        np.testing.assert_allclose(samples.values, AMPLITUDE)

    def test_lattice_frequency_aliases_to_dc(self, fig1_matrix):
        column = fig1_matrix.col(0)
        samples = sample_signal(HarmonicScene(AMPLITUDE, column), fig1_matrix)
        np.testing.assert_allclose(samples.values, AMPLITUDE, atol=1e-12)

    def test_indices_cover_transposed_fpd(self, fig1_matrix):
        samples = sample_signal(HarmonicScene(AMPLITUDE, (1, 2)), fig1_matrix)
        assert samples.indices == fpd_enumerate(fig1_matrix.transpose()).points

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            sample_signal(HarmonicScene(AMPLITUDE, (1, 2, 3)), NONSEPARABLE)

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            sample_signal(HarmonicScene(AMPLITUDE, (1, 2)), IntMatrix.from_rows([[1, 2], [2, 4]]))

    def test_noise_is_seeded(self):
        scene = HarmonicScene(AMPLITUDE, (5, 7), noise_sigma=0.3, rng_seed=11)
        first = sample_signal(scene, NONSEPARABLE)
        second = sample_signal(scene, NONSEPARABLE)
        np.testing.assert_array_equal(first.values, second.values)

    @pytest.mark.parametrize("amplitude, sigma", [(0, 0.0), (1.0, -0.1)])
    def test_invalid_scene(self, amplitude, sigma):
        with pytest.raises(ConfigError):
            HarmonicScene(amplitude, (1, 1), noise_sigma=sigma)


class TestDetectRemainder:
    def test_example(self):
        samples = sample_signal(HarmonicScene(AMPLITUDE, (5, 7)), NONSEPARABLE)
        assert detect_remainder(samples, NONSEPARABLE).r == (2, 3)

    def test_peak_magnitude_and_sidelobes(self):
        samples = sample_signal(HarmonicScene(AMPLITUDE, (5, 7)), NONSEPARABLE)
        spectrum = md_dft(samples, NONSEPARABLE)
        index, peak = spectrum.peak()
        assert spectrum.bins[index] == (2, 3)
        assert peak == pytest.approx(abs(AMPLITUDE) * 9, rel=1e-9)
        others = np.delete(np.abs(spectrum.values), index)
        assert np.all(others <= 1e-9 * abs(AMPLITUDE) * 9)

    def test_matches_mod_reduce(self, rng):
        for _ in range(60):
            modulus = random_nonsingular(rng, 2, 6, max_det=60)
            f = (rng.randint(-10 ** 6, 10 ** 6), rng.randint(-10 ** 6, 10 ** 6))
            samples = sample_signal(HarmonicScene(AMPLITUDE, f), modulus)
            assert detect_remainder(samples, modulus).r == mod_reduce(f, modulus)[1].r

    def test_huge_frequency_stays_exact(self):
        f = (10 ** 40 + 5, -(10 ** 35) + 7)
        samples = sample_signal(HarmonicScene(AMPLITUDE, f), NONSEPARABLE)
        assert detect_remainder(samples, NONSEPARABLE).r == mod_reduce(f, NONSEPARABLE)[1].r

    def test_threshold(self):
        indices = fpd_enumerate(NONSEPARABLE.transpose()).points
        faint = SampleGrid(NONSEPARABLE, indices, np.full(len(indices), 0.01 * AMPLITUDE))
        with pytest.raises(PeakBelowThresholdError):
            detect_remainder(faint, NONSEPARABLE, threshold_ratio=0.5, amplitude=AMPLITUDE)
        assert detect_remainder(faint, NONSEPARABLE).r == (0, 0)

    def test_two_equal_tones_are_ambiguous(self):
        first = sample_signal(HarmonicScene(AMPLITUDE, (0, 0)), NONSEPARABLE)
        second = sample_signal(HarmonicScene(AMPLITUDE, (2, 3)), NONSEPARABLE)
        mixed = SampleGrid(NONSEPARABLE, first.indices, first.values + second.values)
        with pytest.raises(AmbiguousPeakError):
            detect_remainder(mixed, NONSEPARABLE)

    def test_wrong_modulus(self, fig1_matrix):
        samples = sample_signal(HarmonicScene(AMPLITUDE, (1, 1)), fig1_matrix)
        with pytest.raises(DimensionMismatchError):
            md_dft(samples, NONSEPARABLE)


class TestEstimateFrequency:
    def test_recovers_example_scene(self, d2_family):
        estimate = estimate_frequency(HarmonicScene(AMPLITUDE, (17, 29)), d2_family)
        assert estimate.f_hat == (17, 29)
        assert estimate.dynamic_range == 1296
        assert estimate.in_range
        assert [residue.r for residue in estimate.remainders] == [
            mod_reduce((17, 29), member.matrix)[1].r for member in d2_family
        ]

    def test_zero(self, d2_family):
        assert estimate_frequency(HarmonicScene(AMPLITUDE, (0, 0)), d2_family).f_hat == (0, 0)

    def test_every_corner(self, d2_family):
        for f in [(35, 0), (0, 35), (35, 35)]:
            assert estimate_frequency(HarmonicScene(AMPLITUDE, f), d2_family).f_hat == f

    def test_out_of_range_warns(self, d2_family, caplog):
        with caplog.at_level(logging.WARNING):
            estimate = estimate_frequency(HarmonicScene(AMPLITUDE, (40, 3)), d2_family)
        assert not estimate.in_range
        assert estimate.f_hat == (4, 3)
        assert "outside the dynamic range" in caplog.text

    def test_known_amplitude_threshold(self, d2_family):
        estimate = estimate_frequency(
            HarmonicScene(AMPLITUDE, (9, 20)), d2_family, threshold_ratio=0.5, known_amplitude=True
        )
        assert estimate.f_hat == (9, 20)
        assert all(peak == pytest.approx(abs(AMPLITUDE) * abs(determinant(member.matrix)))
                   for peak, member in zip(estimate.peaks, d2_family))

    def test_light_noise(self, d2_family):
        scene = HarmonicScene(AMPLITUDE, (17, 29), noise_sigma=0.05, rng_seed=3)
        first = estimate_frequency(scene, d2_family)
        assert first.f_hat == (17, 29)
        assert estimate_frequency(scene, d2_family).to_dict() == first.to_dict()

    def test_to_dict(self, d2_family):
        report = estimate_frequency(HarmonicScene(AMPLITUDE, (1, 2)), d2_family).to_dict()
        assert report["f_hat"] == [1, 2]
        assert report["lcrm"] == [[36, 0], [0, 36]]
        assert len(report["remainders"]) == 4


class TestNoiseTrials:
    def test_noiseless(self, d2_family):
        frame, summary = run_noise_trials(HarmonicScene(AMPLITUDE, (17, 29)), d2_family, trials=5)
        assert list(frame.columns) == ["trial", "seed", "remainder_hits", "remainder_misses", "f_hat", "recovered"]
        assert len(frame) == 5
        assert summary["recovery_rate"] == 1.0
        assert summary["remainder_error_rate"] == 0.0

    def test_heavy_noise_rates_are_bounded(self, d2_family):
        frame, summary = run_noise_trials(
            HarmonicScene(AMPLITUDE, (17, 29), rng_seed=5), d2_family, trials=8, noise_sigma=5.0
        )
        assert summary["noise_sigma"] == 5.0
        assert 0.0 <= summary["remainder_error_rate"] <= 1.0
        assert 0.0 <= summary["recovery_rate"] <= 1.0
        assert (frame["remainder_hits"] + frame["remainder_misses"] == 4).all()

    def test_seeds_are_reproducible(self, d2_family):
        scene = HarmonicScene(AMPLITUDE, (17, 29), rng_seed=9)
        first, _ = run_noise_trials(scene, d2_family, trials=4, noise_sigma=1.0)
        second, _ = run_noise_trials(scene, d2_family, trials=4, noise_sigma=1.0)
        assert first.equals(second)
