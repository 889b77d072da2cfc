"""
Matrix Divisibility Module
Left coprimality, greatest common left divisors, least common right
multiples and the checks that a constructed family's lcrm is the scalar
matrix (q_1 ... q_L)^D * I.
"""

import itertools
import logging
from dataclasses import dataclass, field
from math import gcd, prod
from typing import Dict, List, Sequence, Tuple

from utils.errors import DimensionMismatchError, EmptyListError, InternalMismatchError, SingularMatrixError
from utils.exact_core import IntMatrix, determinant, integer_inverse, inverse_rational, left_divides
from utils.family_builder import ConstructedMatrix
from utils.normal_forms import hermite_normalize, smith_decompose

logger = logging.getLogger(__name__)


def _check_pair(m: IntMatrix, n: IntMatrix) -> Tuple[int, int]:
    if not m.is_square or not n.is_square or m.shape != n.shape:
        raise DimensionMismatchError(f"Expected two square matrices of one size, got {m.shape} and {n.shape}")
    det_m, det_n = determinant(m), determinant(n)
    if det_m == 0 or det_n == 0:
        raise SingularMatrixError("Both matrices must be nonsingular")
    return det_m, det_n


def _is_identity_block(smith_form: IntMatrix) -> bool:
    """True when a D x 2D Smith form equals (I 0)."""
    return smith_form == IntMatrix.identity(smith_form.rows).hstack(IntMatrix.zeros(smith_form.rows, smith_form.rows))


def minors_gcd(m: IntMatrix, n: IntMatrix) -> int:
    """gcd of all D x D minors of the stacked matrix (m n); stops early once it reaches 1."""
    stacked = m.hstack(n)
    rows = range(stacked.rows)
    result = 0
    for cols in itertools.combinations(range(stacked.cols), stacked.rows):
        result = gcd(result, determinant(stacked.submatrix(rows, cols)))
        if result == 1:
            break
    return result


def determinants_coprime(m: IntMatrix, n: IntMatrix) -> bool:
    """Sufficient (not necessary) coprimality test: gcd(|det m|, |det n|) = 1."""
    return gcd(determinant(m), determinant(n)) == 1


def is_left_coprime(m: IntMatrix, n: IntMatrix, cross_check: bool = False) -> bool:
    """
    Left coprimality by the Smith criterion: Smith form of (m n) is (I 0).

    Args:
        m, n: Nonsingular D x D integer matrices
        cross_check: Also evaluate the all-minors gcd and the determinant
            test and raise InternalMismatchError if they contradict

    Returns:
        True iff the gcld of m and n is unimodular
    """
    _check_pair(m, n)
    verdict = _is_identity_block(smith_decompose(m.hstack(n)).S)

    if cross_check:
        if verdict != (minors_gcd(m, n) == 1):
            raise InternalMismatchError("Smith criterion and all-minors criterion disagree")
        if determinants_coprime(m, n) and not verdict:
            raise InternalMismatchError("Coprime determinants but the Smith criterion failed")

    return verdict


def gcld(m: IntMatrix, n: IntMatrix) -> IntMatrix:
    """
    Greatest common left divisor in Hermite canonical form.

    From U (m n) V = (S_left 0): (m n) V = (U^-1 S_left  0), so
    G = U^-1 S_left left-divides both m and n.
    """
    _check_pair(m, n)
    decomposition = smith_decompose(m.hstack(n))
    dim = m.rows
    s_left = decomposition.S.submatrix(range(dim), range(dim))
    divisor = integer_inverse(decomposition.U) @ s_left
    if not (left_divides(divisor, m) and left_divides(divisor, n)):
        raise InternalMismatchError("gcld does not divide its arguments")
    return hermite_normalize(divisor)[0]


@dataclass(frozen=True)
class LcrmResult:
    """An lcrm as produced by the denominator-clearing Smith procedure, plus its canonical form."""

    raw: IntMatrix
    canonical: IntMatrix

    @property
    def abs_det(self) -> int:
        return abs(determinant(self.canonical))


def lcrm_pair(m: IntMatrix, n: IntMatrix) -> LcrmResult:
    """
    Least common right multiple of two nonsingular matrices.

    Q = m^-1 n is cleared by the lcm c of its denominators; the Smith form
    U (c Q) V = S gives Lambda = S / c, whose reduced numerators and
    denominators form Lambda_a and Lambda_b. Then
    R = m U^-1 Lambda_a = n V Lambda_b.

    Raises:
        SingularMatrixError, InternalMismatchError
    """
    _check_pair(m, n)
    quotient = inverse_rational(m) @ n
    clearing = quotient.denominator_lcm()
    decomposition = smith_decompose(quotient.scale(clearing).to_int())

    numerators, denominators = [], []
    for s in decomposition.diagonal:
        # gcd(s, c) reduces s / c to lowest terms
        common = gcd(s, clearing)
        numerators.append(s // common)
        denominators.append(clearing // common)

    left = m @ integer_inverse(decomposition.U) @ IntMatrix.diagonal(numerators)
    right = n @ decomposition.V @ IntMatrix.diagonal(denominators)
    if left != right:
        raise InternalMismatchError("m U^-1 Lambda_a and n V Lambda_b disagree")

    logger.debug(f"lcrm of pair with |det| {abs(determinant(left))}")
    return LcrmResult(raw=left, canonical=hermite_normalize(left)[0])


def lcrm_family(matrices: Sequence[IntMatrix]) -> IntMatrix:
    """
    Canonical lcrm of a list, folded left with lcrm_pair.

    Raises:
        EmptyListError, SingularMatrixError
    """
    if not matrices:
        raise EmptyListError("lcrm of an empty list is undefined")
    result = hermite_normalize(matrices[0])[0]
    for matrix in matrices[1:]:
        result = lcrm_pair(result, matrix).canonical
    return result


def is_common_right_multiple(candidate: IntMatrix, matrices: Sequence[IntMatrix]) -> bool:
    """True when every matrix left-divides candidate."""
    return all(left_divides(matrix, candidate) for matrix in matrices)


def r_d_matrix(qs: Sequence[int], dim: int) -> IntMatrix:
    """The scalar matrix (q_1 ... q_L)^D * I."""
    if not qs:
        raise EmptyListError("qs must not be empty")
    return IntMatrix.scalar(dim, prod(qs) ** dim)


def search_common_right_multiples(m: IntMatrix, n: IntMatrix, bound: int) -> List[IntMatrix]:
    """
    Brute-force crms C = m X over integer X with entries in [-bound, bound]
    such that n also left-divides C. Exponential in D^2; an oracle only.
    """
    _check_pair(m, n)
    dim = m.rows
    n_inverse = inverse_rational(n)
    found = []
    for values in itertools.product(range(-bound, bound + 1), repeat=dim * dim):
        x = IntMatrix(dim, dim, values)
        if determinant(x) == 0:
            continue
        candidate = m @ x
        if (n_inverse @ candidate).is_integral():
            found.append(candidate)
    return found


@dataclass
class CoprimalityReport:
    """Pairwise left-coprimality verdicts across a list of matrices."""

    labels: List[str]
    verdicts: Dict[Tuple[int, int], bool] = field(default_factory=dict)

    @property
    def failures(self) -> List[Tuple[str, str]]:
        return [(self.labels[a], self.labels[b]) for (a, b), ok in self.verdicts.items() if not ok]

    @property
    def passed(self) -> bool:
        return not self.failures


def coprimality_sweep(
    members: Sequence[ConstructedMatrix], oracle: bool = False
) -> CoprimalityReport:
    """Test every pair of members with is_left_coprime; oracle=True adds the minor-gcd cross check."""
    report = CoprimalityReport(labels=[member.label for member in members])
    for (ia, a), (ib, b) in itertools.combinations(enumerate(members), 2):
        report.verdicts[(ia, ib)] = is_left_coprime(a.matrix, b.matrix, cross_check=oracle)
    logger.info(f"Coprimality sweep: {len(report.verdicts)} pairs, {len(report.failures)} failures")
    return report


@dataclass
class FamilyLcrmReport:
    """Outcome of the four lcrm checks on a constructed family."""

    dim: int
    qs: Tuple[int, ...]
    lcrm: IntMatrix
    r_d: IntMatrix
    dynamic_range: int
    checks: Dict[str, bool] = field(default_factory=dict)
    reduced_dynamic_ranges: Dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_family_lcrm(family: Sequence[ConstructedMatrix], check_minimality: bool = True) -> FamilyLcrmReport:
    """
    Check that (q_1 ... q_L)^D * I is an lcrm of a constructed family.

    Checks:
        crm_integral: M^-1 R_D is integral for every member
        equals_r_d: canonical lcrm_family equals canonical R_D
        det_matches: |det lcrm| = (q_1 ... q_L)^(D^2)
        minimal: dropping any one member strictly shrinks |det lcrm|
    """
    if not family:
        raise EmptyListError("Family must not be empty")
    dim = family[0].dim
    qs = tuple(sorted({member.q for member in family}))
    matrices = [member.matrix for member in family]

    r_d = r_d_matrix(qs, dim)
    lcrm = lcrm_family(matrices)
    dynamic_range = abs(determinant(lcrm))

    report = FamilyLcrmReport(dim=dim, qs=qs, lcrm=lcrm, r_d=r_d, dynamic_range=dynamic_range)
    report.checks["crm_integral"] = is_common_right_multiple(r_d, matrices)
    report.checks["equals_r_d"] = lcrm == hermite_normalize(r_d)[0]
    report.checks["det_matches"] = dynamic_range == prod(qs) ** (dim * dim)

    if check_minimality:
        minimal = True
        for index, member in enumerate(family):
            remainder = matrices[:index] + matrices[index + 1:]
            if not remainder:
                continue
            reduced = abs(determinant(lcrm_family(remainder)))
            report.reduced_dynamic_ranges[member.label] = reduced
            minimal = minimal and reduced < dynamic_range
        report.checks["minimal"] = minimal

    if report.passed:
        logger.info(f"lcrm verified for D={dim}, qs={list(qs)}: dynamic range {dynamic_range}")
    else:
        failed = [name for name, ok in report.checks.items() if not ok]
        logger.warning(f"lcrm checks failed for D={dim}, qs={list(qs)}: {failed}")
    return report
