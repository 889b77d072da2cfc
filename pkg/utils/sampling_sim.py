"""
Sampling Simulation Module
Undersampling of a single-tone multi-dimensional harmonic by integer
sampling matrices, remainder detection from MD-DFT peaks, and frequency
estimation through the matrix CRT.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.errors import (
    AmbiguousPeakError,
    ConfigError,
    DimensionMismatchError,
    PeakBelowThresholdError,
)
from utils.exact_core import IntMatrix, Vector, determinant, inverse_rational, require_nonsingular
from utils.family_builder import ConstructedMatrix
from utils.lattice_fpd import Residue, fpd_enumerate, is_in_fpd, mod_reduce
from utils.md_crt import MdCrtSolver

logger = logging.getLogger(__name__)

AMBIGUITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class HarmonicScene:
    """x(t) = a * exp(j 2 pi f^T t) + noise, with an integer frequency vector f."""

    amplitude: complex
    frequency: Vector
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frequency", tuple(int(v) for v in self.frequency))
        if self.amplitude == 0:
            raise ConfigError("Amplitude must be nonzero")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.frequency)


@dataclass(frozen=True)
class SampleGrid:
    """Samples x[n] indexed by the sorted points n of FPD(M^T)."""

    modulus: IntMatrix
    indices: Tuple[Vector, ...]
    values: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """MD-DFT bins X(k) for the sorted points k of FPD(M)."""

    modulus: IntMatrix
    bins: Tuple[Vector, ...]
    values: np.ndarray

    def peak(self) -> Tuple[int, float]:
        magnitudes = np.abs(self.values)
        index = int(np.argmax(magnitudes))
        return index, float(magnitudes[index])


def _scaled_inverse(modulus: IntMatrix) -> Tuple[IntMatrix, int]:
    """(A, d) with d = |det M| and A = d * M^-1 an integer matrix."""
    d = abs(require_nonsingular(modulus))
    return inverse_rational(modulus).scale(d).to_int(), d


def _phase_numerators(scaled_inverse: IntMatrix, d: int, lefts: Sequence[Vector], rights: Sequence[Vector]) -> np.ndarray:
    """
    Integer numerators e with k^T M^-T n = e / d (mod 1), for every k in lefts
    and n in rights. Computed on Python ints so the reduction is exact.
    """
    projected = np.array([scaled_inverse.apply(k) for k in lefts], dtype=object)
    points = np.array(rights, dtype=object).T
    return np.mod(projected.dot(points), d).astype(np.int64)


def sample_signal(
    scene: HarmonicScene, modulus: IntMatrix, rng: Optional[np.random.Generator] = None
) -> SampleGrid:
    """
    Undersample the scene with sampling matrix M.

    x[n] = a exp(j 2 pi f^T M^-T n) + noise for n in FPD(M^T); each phase is
    reduced modulo 1 in integer arithmetic before evaluation.

    Args:
        scene: Harmonic scene
        modulus: Nonsingular D x D sampling matrix
        rng: Generator for the noise; defaults to one seeded by scene.rng_seed

    Returns:
        SampleGrid
    """
    if modulus.rows != scene.dim or not modulus.is_square:
        raise DimensionMismatchError(f"Sampling matrix {modulus.shape} does not fit a {scene.dim}-D scene")
    scaled_inverse, d = _scaled_inverse(modulus)
    indices = fpd_enumerate(modulus.transpose()).points

    numerators = _phase_numerators(scaled_inverse, d, [scene.frequency], indices)[0]
    values = scene.amplitude * np.exp(2j * np.pi * numerators / d)

    if scene.noise_sigma > 0:
        rng = rng if rng is not None else np.random.default_rng(scene.rng_seed)
        scale = scene.noise_sigma / np.sqrt(2)
        values = values + rng.normal(0, scale, values.shape) + 1j * rng.normal(0, scale, values.shape)

    return SampleGrid(modulus=modulus, indices=indices, values=values)


def md_dft(samples: SampleGrid, modulus: IntMatrix) -> Spectrum:
    """X(k) = sum_n x[n] exp(-j 2 pi k^T M^-T n) for every k in FPD(M), by direct summation."""
    if samples.modulus != modulus:
        raise DimensionMismatchError("Samples were taken with a different sampling matrix")
    scaled_inverse, d = _scaled_inverse(modulus)
    bins = fpd_enumerate(modulus).points

    numerators = _phase_numerators(scaled_inverse, d, bins, samples.indices)
    twiddles = np.exp(-2j * np.pi * numerators / d)
    return Spectrum(modulus=modulus, bins=bins, values=twiddles @ samples.values)


def detect_remainder(
    samples: SampleGrid,
    modulus: IntMatrix,
    threshold_ratio: Optional[float] = None,
    amplitude: Optional[complex] = None,
) -> Residue:
    """
    The remainder of the unknown frequency modulo M, read off the MD-DFT peak.

    Args:
        samples: Output of sample_signal for the same matrix
        modulus: Sampling matrix M
        threshold_ratio: When amplitude is known, the peak must reach
            threshold_ratio * |a| * |det M|
        amplitude: Known amplitude, if any

    Returns:
        Residue at the argmax bin

    Raises:
        AmbiguousPeakError, PeakBelowThresholdError
    """
    return _locate_peak(md_dft(samples, modulus), threshold_ratio, amplitude)[0]


def _locate_peak(
    spectrum: Spectrum, threshold_ratio: Optional[float], amplitude: Optional[complex]
) -> Tuple[Residue, float]:
    magnitudes = np.abs(spectrum.values)
    index, peak = spectrum.peak()

    if len(magnitudes) > 1:
        runner_up = float(np.partition(magnitudes, -2)[-2])
        if peak > 0 and runner_up >= peak * (1 - AMBIGUITY_TOLERANCE):
            raise AmbiguousPeakError(f"Two bins share the peak magnitude {peak:.6g}")

    if amplitude is not None and threshold_ratio is not None:
        required = threshold_ratio * abs(amplitude) * len(magnitudes)
        if peak < required:
            raise PeakBelowThresholdError(f"Peak {peak:.6g} is below the threshold {required:.6g}")

    return Residue(spectrum.bins[index], spectrum.modulus), peak


@dataclass
class FrequencyEstimate:
    """Result of the sample, detect and reconstruct pipeline."""

    f_hat: Vector
    remainders: List[Residue]
    lcrm: IntMatrix
    dynamic_range: int
    in_range: Optional[bool] = None
    peaks: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f_hat": list(self.f_hat),
            "remainders": [list(residue.r) for residue in self.remainders],
            "lcrm": self.lcrm.to_rows(),
            "dynamic_range": self.dynamic_range,
            "in_range": self.in_range,
        }


def estimate_frequency(
    scene: HarmonicScene,
    family: Sequence[ConstructedMatrix],
    threshold_ratio: Optional[float] = None,
    known_amplitude: bool = False,
    solver: Optional[MdCrtSolver] = None,
) -> FrequencyEstimate:
    """
    Sample the scene with every family member, detect each remainder and
    reconstruct f with the matrix CRT.

    Noise streams are split per matrix from the scene seed. A true frequency
    outside FPD(lcrm) is logged as a warning, not raised.
    """
    moduli = [member.matrix for member in family]
    solver = solver or MdCrtSolver(moduli)
    streams = np.random.SeedSequence(scene.rng_seed).spawn(len(moduli))

    remainders = []
    peaks = []
    for modulus, stream in zip(moduli, streams):
        samples = sample_signal(scene, modulus, rng=np.random.default_rng(stream))
        residue, peak = _locate_peak(
            md_dft(samples, modulus),
            threshold_ratio,
            scene.amplitude if known_amplitude else None,
        )
        remainders.append(residue)
        peaks.append(peak)

    solution = solver.solve([residue.r for residue in remainders])
    in_range = is_in_fpd(scene.frequency, solver.modulus)
    if not in_range:
        logger.warning(f"Frequency {scene.frequency} lies outside the dynamic range; the estimate is its FPD representative")

    return FrequencyEstimate(
        f_hat=solution.r,
        remainders=remainders,
        lcrm=solver.modulus,
        dynamic_range=abs(determinant(solver.modulus)),
        in_range=in_range,
        peaks=peaks,
    )


def run_noise_trials(
    scene: HarmonicScene,
    family: Sequence[ConstructedMatrix],
    trials: int,
    noise_sigma: Optional[float] = None,
) -> Tuple[pd.DataFrame, Dict[str, float]]:
    """
    Monte Carlo over noise seeds derived from scene.rng_seed.
    noise_sigma, when given, replaces the scene's own noise level.

    Returns:
        (per-trial DataFrame, summary with remainder error rate and recovery rate)
    """
    sigma = scene.noise_sigma if noise_sigma is None else noise_sigma
    moduli = [member.matrix for member in family]
    solver = MdCrtSolver(moduli)
    truth = [mod_reduce(scene.frequency, modulus)[1].r for modulus in moduli]
    seeds = np.random.SeedSequence(scene.rng_seed).generate_state(trials)

    rows = []
    for trial, seed in enumerate(seeds):
        trial_scene = HarmonicScene(scene.amplitude, scene.frequency, sigma, int(seed))
        try:
            estimate = estimate_frequency(trial_scene, family, solver=solver)
            hits = sum(1 for residue, expected in zip(estimate.remainders, truth) if residue.r == expected)
            f_hat = estimate.f_hat
        except AmbiguousPeakError:
            hits, f_hat = 0, None
        rows.append(
            {
                "trial": trial,
                "seed": int(seed),
                "remainder_hits": hits,
                "remainder_misses": len(moduli) - hits,
                "f_hat": f_hat,
                "recovered": f_hat == scene.frequency,
            }
        )

    frame = pd.DataFrame(rows)
    summary = {
        "trials": trials,
        "noise_sigma": sigma,
        "remainder_error_rate": float(frame["remainder_misses"].sum()) / (trials * len(moduli)) if trials else 0.0,
        "recovery_rate": float(frame["recovered"].mean()) if trials else 0.0,
    }
    logger.info(f"Noise trials: {summary}")
    return frame, summary
