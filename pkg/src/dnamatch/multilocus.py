"""Multi-locus aggregation and database-scale collision statistics.

Per-locus match-class probabilities combine, under independence of
loci, into a joint distribution over (number of matching loci, number
of partially matching loci). Expected pair counts in a database follow
by scaling with the number of pairs, and the classic birthday formulas
give the probability of seeing at least one fully matching pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .freqmodel import FrequencySet, ThetaModel
from .locusmatch import MatchClassProbs, match_class_probs

# Equal-probability caveat surfaced by the CLI next to birthday numbers.
BIRTHDAY_CAVEAT = (
    "assumes all profiles equally likely and independent; real profile "
    "probabilities vary, so these numbers are approximate at best"
)

_CHUNK = 1 << 20  # exact-product evaluation block size


def locus_class_vector(
    freqs: FrequencySet, theta: Union[ThetaModel, float]
) -> list[MatchClassProbs]:
    """Per-locus match-class probabilities, in panel order."""
    return [match_class_probs(locus, theta) for locus in freqs]


@dataclass(frozen=True, eq=False)
class MatchCountDistribution:
    """Joint distribution q[m, p] over matching and partially matching
    locus counts for a random pair of profiles."""

    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("q must be a square (L+1, L+1) matrix")
        if np.any(q < 0.0):
            raise ValueError("negative probability in match-count distribution")
        if abs(float(q.sum()) - 1.0) > 1e-9:
            raise ValueError(f"match-count distribution sums to {q.sum()!r}")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    @property
    def n_loci(self) -> int:
        return self.q.shape[0] - 1


def joint_match_distribution(
    class_probs: Sequence[MatchClassProbs],
) -> MatchCountDistribution:
    """Combine per-locus class probabilities into q[m, p].

    Dynamic programming over loci: each locus shifts probability mass by
    one along the match axis, one along the partial axis, or not at all.
    Cost is O(L^3) rather than the 3**L of direct expansion.
    """
    L = len(class_probs)
    if L < 1:
        raise ValueError("need at least one locus")
    q = np.zeros((L + 1, L + 1))
    q[0, 0] = 1.0
    for probs in class_probs:
        nxt = q * probs.mismatch
        nxt[1:, :] += q[:-1, :] * probs.match
        nxt[:, 1:] += q[:, :-1] * probs.partial
        q = nxt
    return MatchCountDistribution(q=q)


def expected_pair_counts(dist: MatchCountDistribution, n: int) -> np.ndarray:
    """Expected number of profile pairs in each (m, p) cell for a
    database of n profiles."""
    if n < 2:
        raise ValueError(f"database size must be >= 2, got {n}")
    return dist.q * float(math.comb(n, 2))


@dataclass(frozen=True, eq=False)
class ExpectedPairTable:
    """Expected pair counts arranged as a matching-by-partial matrix."""

    counts: np.ndarray  # rows: matching loci, columns: partially matching loci
    n_profiles: int

    @property
    def n_loci(self) -> int:
        return self.counts.shape[0] - 1

    def row(self, m: int) -> np.ndarray:
        return self.counts[m]


def expected_profile_pair_table(
    n: int, dist: MatchCountDistribution
) -> ExpectedPairTable:
    """Expected counts for all C(n, 2) comparisons in an n-profile dataset."""
    return ExpectedPairTable(counts=expected_pair_counts(dist, n), n_profiles=n)


@dataclass(frozen=True)
class BirthdayResult:
    """Probability that at least two of n profiles coincide, when every
    profile has probability P."""

    exact: float | None
    approx: float
    exact_valid: bool

    @property
    def caveat(self) -> str:
        return BIRTHDAY_CAVEAT


def birthday_at_least_one(P: float, n: int) -> BirthdayResult:
    """Exact product form and exp(-n^2 P / 2) approximation.

    The exact product 1*(1-P)(1-2P)...(1-(n-1)P) only makes sense while
    (n-1)P < 1; outside that range only the approximation is returned
    and the result is flagged.
    """
    if not 0.0 < P < 1.0:
        raise ValueError(f"profile probability must be in (0, 1), got {P}")
    if n < 2:
        raise ValueError(f"need at least two profiles, got {n}")
    approx = -math.expm1(-(float(n) ** 2) * P / 2.0)
    if (n - 1) * P >= 1.0:
        return BirthdayResult(exact=None, approx=approx, exact_valid=False)
    log_no_match = 0.0
    for lo in range(1, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        log_no_match += float(np.log1p(-P * np.arange(lo, hi, dtype=float)).sum())
    exact = -math.expm1(log_no_match)
    return BirthdayResult(exact=exact, approx=approx, exact_valid=True)


def sample_size_for_half(P: float) -> int:
    """Smallest n whose birthday approximation reaches 50%."""
    if not 0.0 < P < 1.0:
        raise ValueError(f"profile probability must be in (0, 1), got {P}")
    target = 2.0 * math.log(2.0)
    n = max(2, math.ceil(math.sqrt(target / P)))
    while n > 2 and (n - 1) * (n - 1) * P >= target:
        n -= 1
    while n * n * P < target:
        n += 1
    return n
