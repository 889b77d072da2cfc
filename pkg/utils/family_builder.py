"""
Family Builder Module
Feasible permutation sets and the construction of pairwise co-prime
D x D integer matrix families M_{i,j} = q_i * I + A_j, their sign-flipped
variants, and the separable diagonal families they are compared against.

Permutations are 1-based at this module's boundary and converted to
0-based indices only where matrix positions are written.
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from math import comb, factorial, gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from utils.errors import (
    DimensionMismatchError,
    DuplicateLastElementError,
    InvalidPermutationError,
    InvalidQError,
    NotPairwiseCoprimeError,
    NotSortedError,
    ToeplitzOddDimensionError,
)
from utils.exact_core import IntMatrix

logger = logging.getLogger(__name__)

Permutation = Tuple[int, ...]
SignMask = Tuple[Tuple[int, ...], ...]

FEASIBLE_KINDS = ("cyclic", "toeplitz", "explicit")


def validate_permutation(perm: Sequence[int], dim: Optional[int] = None) -> Permutation:
    """Check that perm is a bijection of {1..D} and return it as a tuple."""
    perm = tuple(int(p) for p in perm)
    size = len(perm) if dim is None else dim
    if len(perm) != size or sorted(perm) != list(range(1, size + 1)):
        raise InvalidPermutationError(f"{perm} is not a permutation of 1..{size}")
    return perm


@dataclass(frozen=True)
class FeasiblePermutationSet:
    """Permutations of {1..D} whose last elements are pairwise distinct."""

    dim: int
    perms: Tuple[Permutation, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidPermutationError("Dimension must be at least 1")
        if not 1 <= len(self.perms) <= self.dim:
            raise InvalidPermutationError(f"A feasible set holds 1..{self.dim} permutations, got {len(self.perms)}")
        perms = tuple(validate_permutation(p, self.dim) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        last = [p[-1] for p in perms]
        if len(set(last)) != len(last):
            raise DuplicateLastElementError(f"Last elements {last} are not pairwise distinct")

    @property
    def last_elements(self) -> Tuple[int, ...]:
        """The index set K."""
        return tuple(p[-1] for p in self.perms)

    def __len__(self) -> int:
        return len(self.perms)


def cyclic_permutations(dim: int) -> List[Permutation]:
    return [tuple((start + k) % dim + 1 for k in range(dim)) for start in range(dim)]


def toeplitz_permutations(dim: int) -> List[Permutation]:
    """
    sigma_j = (j, <2j>, ..., <Dj>) with residues taken modulo D + 1.

    These are permutations only when every j is a unit modulo D + 1; the
    first failure is D = 8 (j = 3 hits 0), rejected by generate_feasible_set.
    """
    if dim % 2:
        raise ToeplitzOddDimensionError(f"Toeplitz feasible sets need an even dimension, got {dim}")
    return [tuple((k * j) % (dim + 1) for k in range(1, dim + 1)) for j in range(1, dim + 1)]


def generate_feasible_set(
    dim: int, kind: str = "cyclic", perms: Optional[Sequence[Sequence[int]]] = None
) -> FeasiblePermutationSet:
    """
    Build a validated feasible permutation set.

    Args:
        dim: Dimension D >= 1
        kind: 'cyclic', 'toeplitz' (even D only) or 'explicit'
        perms: The permutations for kind='explicit'

    Returns:
        FeasiblePermutationSet
    """
    if dim < 1:
        raise InvalidPermutationError("Dimension must be at least 1")
    if kind == "cyclic":
        chosen = cyclic_permutations(dim)
    elif kind == "toeplitz":
        chosen = toeplitz_permutations(dim)
        blocked = [j for j in range(1, dim + 1) if gcd(j, dim + 1) != 1]
        if blocked:
            raise InvalidPermutationError(
                f"Toeplitz feasible sets need D + 1 = {dim + 1} to be prime; "
                f"j = {blocked[0]} shares a factor with it"
            )
    elif kind == "explicit":
        if not perms:
            raise InvalidPermutationError("Explicit feasible sets need at least one permutation")
        chosen = [tuple(p) for p in perms]
    else:
        raise InvalidPermutationError(f"Unknown feasible-set kind: {kind}")
    return FeasiblePermutationSet(dim, tuple(chosen))


def count_feasible_sets(dim: int) -> int:
    """Sum over d of C(D, d) * ((D-1)!)^d."""
    if dim < 1:
        raise InvalidPermutationError("Dimension must be at least 1")
    per_index = factorial(dim - 1)
    return sum(comb(dim, d) * per_index ** d for d in range(1, dim + 1))


def enumerate_feasible_sets(dim: int) -> Iterator[FeasiblePermutationSet]:
    """Every feasible set of {1..D}: each nonempty K with one permutation ending in each j in K."""
    ending_in = {
        j: [p for p in itertools.permutations(range(1, dim + 1)) if p[-1] == j]
        for j in range(1, dim + 1)
    }
    for size in range(1, dim + 1):
        for index_set in itertools.combinations(range(1, dim + 1), size):
            for choice in itertools.product(*(ending_in[j] for j in index_set)):
                yield FeasiblePermutationSet(dim, tuple(choice))


def ones_matrix(perm: Sequence[int]) -> IntMatrix:
    """A_j: ones at (sigma(k-1), sigma(k)) for k = 2..D."""
    perm = validate_permutation(perm)
    dim = len(perm)
    rows = [[0] * dim for _ in range(dim)]
    for k in range(1, dim):
        rows[perm[k - 1] - 1][perm[k] - 1] = 1
    return IntMatrix.from_rows(rows)


@dataclass(frozen=True)
class ConstructedMatrix:
    """A family member with its provenance."""

    matrix: IntMatrix
    q: int
    perm: Permutation
    sign_mask: Optional[SignMask] = None
    i: int = 1
    j: int = field(default=0)

    def __post_init__(self):
        if self.j == 0:
            object.__setattr__(self, "j", self.perm[-1] if self.perm else 0)

    @property
    def dim(self) -> int:
        return self.matrix.rows

    @property
    def label(self) -> str:
        return f"M_{self.i},{self.j}"

    @property
    def ones(self) -> IntMatrix:
        """The binary part A_j of q*I + A_j (before any sign mask)."""
        if not self.perm:
            return IntMatrix.zeros(self.dim, self.dim)
        return ones_matrix(self.perm)


def construct_matrix(q: int, sigma: Sequence[int], i: int = 1) -> ConstructedMatrix:
    """
    q on the full diagonal and ones at (sigma(k-1), sigma(k)), k = 2..D.

    Raises:
        InvalidQError, InvalidPermutationError
    """
    if int(q) != q or q <= 1:
        raise InvalidQError(f"q must be an integer greater than 1, got {q}")
    sigma = validate_permutation(sigma)
    matrix = IntMatrix.scalar(len(sigma), q) + ones_matrix(sigma)
    return ConstructedMatrix(matrix=matrix, q=q, perm=sigma, i=i)


def validate_qs(qs: Sequence[int]) -> Tuple[int, ...]:
    """Check 1 < q_1 < ... < q_L and pairwise coprimality."""
    qs = tuple(int(q) for q in qs)
    if not qs:
        raise InvalidQError("At least one q is required")
    if qs[0] <= 1:
        raise InvalidQError(f"q_1 must exceed 1, got {qs[0]}")
    for a, b in zip(qs, qs[1:]):
        if b <= a:
            raise NotSortedError(f"qs must be strictly increasing, got {list(qs)}")
    for a, b in itertools.combinations(qs, 2):
        if abs(gcd(a, b)) != 1:
            raise NotPairwiseCoprimeError(f"{a} and {b} share the factor {gcd(a, b)}")
    return qs


def construct_family(qs: Sequence[int], pf: FeasiblePermutationSet) -> List[ConstructedMatrix]:
    """
    Pairwise co-prime family: one matrix per (q_i, sigma_j).

    Members are ordered i-major, then by ascending j = sigma_j(D).

    Returns:
        L * |pf| ConstructedMatrix objects
    """
    qs = validate_qs(qs)
    perms = sorted(pf.perms, key=lambda p: p[-1])
    family = [construct_matrix(q, perm, i=i) for i, q in enumerate(qs, start=1) for perm in perms]
    logger.info(f"Constructed {len(family)} matrices of dimension {pf.dim} for qs={list(qs)}")
    return family


def family_index(family: Sequence[ConstructedMatrix]) -> Dict[Tuple[int, int], ConstructedMatrix]:
    """Members keyed by (i, j)."""
    index = {}
    for member in family:
        key = (member.i, member.j)
        if key in index:
            raise DuplicateLastElementError(f"Two members are labelled {member.label}")
        index[key] = member
    return index


def construct_diagonal_family(qs: Sequence[int], dim: int) -> List[ConstructedMatrix]:
    """Separable moduli D_{i,j} = diag(1, ..., q_i^D, ..., 1) with q_i^D at position j."""
    qs = validate_qs(qs)
    family = []
    for i, q in enumerate(qs, start=1):
        for j in range(1, dim + 1):
            values = [1] * dim
            values[j - 1] = q ** dim
            family.append(ConstructedMatrix(matrix=IntMatrix.diagonal(values), q=q, perm=(), i=i, j=j))
    return family


def apply_sign_flips(member: ConstructedMatrix, mask: Sequence[Sequence[int]]) -> ConstructedMatrix:
    """Entrywise product with a +/-1 mask; the mask is recorded in provenance."""
    dim = member.dim
    if len(mask) != dim or any(len(row) != dim for row in mask):
        raise DimensionMismatchError(f"Sign mask must be {dim}x{dim}")
    mask = tuple(tuple(int(s) for s in row) for row in mask)
    if any(s not in (1, -1) for row in mask for s in row):
        raise DimensionMismatchError("Sign mask entries must be +1 or -1")
    flipped = IntMatrix(dim, dim, tuple(v * s for v, s in zip(member.matrix.entries, (s for row in mask for s in row))))
    return ConstructedMatrix(matrix=flipped, q=member.q, perm=member.perm, sign_mask=mask, i=member.i, j=member.j)


def random_sign_mask(dim: int, rng: random.Random) -> SignMask:
    return tuple(tuple(rng.choice((1, -1)) for _ in range(dim)) for _ in range(dim))


def in_entry_set(member: ConstructedMatrix, q_max: int) -> bool:
    """Membership in S_D: every entry lies in {0, +-1, ..., +-q_max}."""
    return all(abs(v) <= q_max for v in member.matrix.entries)


@dataclass(frozen=True)
class CommutationReport:
    same_index_pairs: int
    cross_index_pairs: int
    same_index_commute: bool
    witness: Optional[Tuple[str, str]]

    @property
    def passed(self) -> bool:
        return self.same_index_commute and (self.witness is not None or self.cross_index_pairs == 0)


def commutation_report(family: Sequence[ConstructedMatrix]) -> CommutationReport:
    """
    Same-j members must commute; for D >= 2 some cross-j pair must not.

    The witness is the first non-commuting cross-j pair, or None.
    """
    same_pairs = 0
    cross_pairs = 0
    commute = True
    witness = None
    for a, b in itertools.combinations(family, 2):
        product_ab = a.matrix @ b.matrix
        product_ba = b.matrix @ a.matrix
        if a.j == b.j:
            same_pairs += 1
            commute = commute and product_ab == product_ba
        else:
            cross_pairs += 1
            if witness is None and product_ab != product_ba:
                witness = (a.label, b.label)
    return CommutationReport(
        same_index_pairs=same_pairs, cross_index_pairs=cross_pairs, same_index_commute=commute, witness=witness
    )
