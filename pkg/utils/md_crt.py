"""
MD-CRT Module
Reconstruction of an integer vector from its remainders modulo pairwise
left co-prime integer matrices, by folding matrix Bezout identities, with a
brute-force FPD scan kept as an independent oracle.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from utils.errors import DimensionMismatchError, EmptyListError, MultipleSolutionsError, NotCoprimeError
from utils.exact_core import IntMatrix, Vector
from utils.lattice_fpd import ModReducer, Residue, fpd_enumerate, mod_reduce
from utils.matrix_divisibility import lcrm_pair
from utils.normal_forms import smith_decompose

logger = logging.getLogger(__name__)


def bezout_pair(m1: IntMatrix, m2: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """
    Matrices P, Q with m1 P + m2 Q = I.

    From U (m1 m2) W = (I 0): (m1 m2) W[:, :D] U = I, so P and Q are the
    top and bottom D x D blocks of W[:, :D] U.

    Raises:
        NotCoprimeError: the Smith form of (m1 m2) is not (I 0)
    """
    if m1.shape != m2.shape or not m1.is_square:
        raise DimensionMismatchError(f"Expected two square matrices of one size, got {m1.shape} and {m2.shape}")
    dim = m1.rows
    decomposition = smith_decompose(m1.hstack(m2))
    if decomposition.diagonal != (1,) * dim:
        raise NotCoprimeError(f"Moduli are not left co-prime (Smith diagonal {decomposition.diagonal})")

    t = decomposition.V.submatrix(range(2 * dim), range(dim)) @ decomposition.U
    p = t.submatrix(range(dim), range(dim))
    q = t.submatrix(range(dim, 2 * dim), range(dim))
    return p, q


@dataclass(frozen=True)
class _FoldStep:
    modulus: IntMatrix
    next_modulus: IntMatrix
    bezout_left: IntMatrix  # accumulated modulus @ P
    reducer: ModReducer


class MdCrtSolver:
    """
    CRT for a fixed list of matrix moduli.

    The fold plan (Bezout factors and intermediate canonical lcrms) is built
    once; solve() then costs a few matrix-vector products per step.
    """

    def __init__(self, moduli: Sequence[IntMatrix]):
        if not moduli:
            raise EmptyListError("At least one modulus is required")
        self.moduli = list(moduli)
        self.steps: List[_FoldStep] = []

        accumulated = self.moduli[0]
        for modulus in self.moduli[1:]:
            p, _ = bezout_pair(accumulated, modulus)
            combined = lcrm_pair(accumulated, modulus).canonical
            self.steps.append(_FoldStep(accumulated, modulus, accumulated @ p, ModReducer(combined)))
            accumulated = combined

        # a lone modulus is its own lcrm and keeps its own FPD
        self.modulus = accumulated
        logger.debug(f"CRT plan with {len(self.moduli)} moduli")

    def solve(self, remainders: Sequence[Sequence[int]]) -> Residue:
        """
        Reconstruct the unique vector in FPD(lcrm) with the given remainders.

        Args:
            remainders: One remainder vector per modulus, in the same order

        Returns:
            Residue whose modulus is the canonical lcrm of all moduli
        """
        if len(remainders) != len(self.moduli):
            raise DimensionMismatchError(f"Expected {len(self.moduli)} remainders, got {len(remainders)}")

        current: Vector = tuple(remainders[0])
        for step, remainder in zip(self.steps, remainders[1:]):
            difference = tuple(b - a for a, b in zip(current, remainder))
            shift = step.bezout_left.apply(difference)
            candidate = tuple(a + s for a, s in zip(current, shift))
            current = step.reducer.reduce(candidate)[1]

        return Residue(current, self.modulus)


def crt_pair(a: Residue, b: Residue) -> Residue:
    """Combine two residues with left co-prime moduli: n0 = r1 + M1 P (r2 - r1), reduced mod the lcrm."""
    return MdCrtSolver([a.modulus, b.modulus]).solve([a.r, b.r])


def crt_solve(residues: Sequence[Residue]) -> Residue:
    """
    Fold crt_pair over a residue list.

    Raises:
        EmptyListError, NotCoprimeError
    """
    if not residues:
        raise EmptyListError("At least one residue is required")
    solution = MdCrtSolver([residue.modulus for residue in residues]).solve([residue.r for residue in residues])
    logger.info(f"CRT solved over {len(residues)} moduli: {solution.r}")
    return solution


def crt_brute_force(residues: Sequence[Residue], modulus: IntMatrix) -> Optional[Vector]:
    """
    Scan FPD(modulus) for the vector whose remainders match every residue.

    Returns:
        The unique match, or None when no point matches

    Raises:
        MultipleSolutionsError: two points match
    """
    reducers = [(ModReducer(residue.modulus), residue.r) for residue in residues]
    match = None
    for point in fpd_enumerate(modulus).points:
        if all(reducer.reduce(point)[1] == r for reducer, r in reducers):
            if match is not None:
                raise MultipleSolutionsError(f"Both {match} and {point} match the residues")
            match = point
    return match


def remainders_of(vector: Sequence[int], moduli: Sequence[IntMatrix]) -> List[Residue]:
    """The residue of vector modulo each modulus."""
    return [mod_reduce(vector, modulus)[1] for modulus in moduli]
