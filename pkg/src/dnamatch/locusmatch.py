"""Single-locus match probability calculus under the coancestry model.

The population model treats allele frequencies across replicate
populations as Dirichlet, which yields a simple sequential draw rule:
after n alleles have been drawn, ni of them of type Ai, the next draw is
Ai with probability

    (ni*theta + (1 - theta)*pi) / (1 + (n - 1)*theta).

Genotype-pair probabilities and the match / partial match / mismatch
closed forms all follow from products of that rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

from .freqmodel import LocusModel, ThetaModel, power_sums, theta_value

Genotype = tuple[int, int]


def canonical_genotype(g: Genotype) -> Genotype:
    a, b = g
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class AlleleCounts:
    """Counts of previously drawn alleles, by allele index."""

    counts: Mapping[int, int]

    def __post_init__(self):
        for idx, c in self.counts.items():
            if c < 0:
                raise ValueError(f"negative count for allele {idx}")

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def of(cls, *allele_indices: int) -> "AlleleCounts":
        counts: dict[int, int] = {}
        for idx in allele_indices:
            counts[idx] = counts.get(idx, 0) + 1
        return cls(counts=counts)


@dataclass(frozen=True)
class MatchClassProbs:
    """Probabilities that a pair of genotypes match, partially match
    (share exactly one allele type) or mismatch at one locus."""

    match: float
    partial: float
    mismatch: float

    def __post_init__(self):
        for value in (self.match, self.partial, self.mismatch):
            if not -1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"match-class probability {value} outside [0, 1]")
        total = self.match + self.partial + self.mismatch
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"match-class probabilities sum to {total!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.match, self.partial, self.mismatch)


def _draw_prob(p: float, t: float, n_same: int, n_total: int) -> float:
    if n_total == 0:
        return p
    return (n_same * t + (1.0 - t) * p) / (1.0 + (n_total - 1) * t)


def dirichlet_draw_prob(
    locus: LocusModel,
    theta: Union[ThetaModel, float],
    prior: AlleleCounts,
    i: int,
) -> float:
    """Probability that the next allele drawn is of type i, given prior draws."""
    t = theta_value(theta)
    if not 0 <= i < locus.n_alleles:
        raise IndexError(f"allele index {i} out of range for locus {locus.name!r}")
    return _draw_prob(float(locus.freqs[i]), t, prior.counts.get(i, 0), prior.total)


def _sequence_prob(locus: LocusModel, t: float, order: tuple[int, ...]) -> float:
    """Probability of drawing the given allele sequence, in order."""
    freqs = locus.freqs
    counts: dict[int, int] = {}
    n = 0
    prob = 1.0
    for idx in order:
        prob *= _draw_prob(float(freqs[idx]), t, counts.get(idx, 0), n)
        counts[idx] = counts.get(idx, 0) + 1
        n += 1
    return prob


def _check_genotype(locus: LocusModel, g: Genotype) -> Genotype:
    a, b = canonical_genotype(g)
    if not (0 <= a < locus.n_alleles and 0 <= b < locus.n_alleles):
        raise ValueError(f"unknown allele in genotype {g} for locus {locus.name!r}")
    return (a, b)


def single_genotype_prob(
    locus: LocusModel, theta: Union[ThetaModel, float], g: Genotype
) -> float:
    """Probability that one individual has unordered genotype g."""
    t = theta_value(theta)
    a, b = _check_genotype(locus, g)
    mult = 1.0 if a == b else 2.0
    return mult * _sequence_prob(locus, t, (a, b))


def genotype_pair_prob(
    locus: LocusModel,
    theta: Union[ThetaModel, float],
    g1: Genotype,
    g2: Genotype,
) -> float:
    """Probability that two individuals have unordered genotypes g1 and g2.

    Computed as the sequential draw probability of the four alleles,
    with a factor 2 for each heterozygote's two internal orderings
    (draw sequences are exchangeable, so one representative ordering
    carries the full multiplicity).
    """
    t = theta_value(theta)
    a1, b1 = _check_genotype(locus, g1)
    a2, b2 = _check_genotype(locus, g2)
    mult = (1.0 if a1 == b1 else 2.0) * (1.0 if a2 == b2 else 2.0)
    return mult * _sequence_prob(locus, t, (a1, b1, a2, b2))


def match_class_probs(
    locus: LocusModel, theta: Union[ThetaModel, float]
) -> MatchClassProbs:
    """Match / partial / mismatch probabilities for two random individuals.

    Closed forms in theta and the power sums S2, S3, S4, with common
    denominator D = (1 + theta)(1 + 2*theta). Each numerator's terms are
    accumulated with fsum to keep the small theta-power terms exact.
    """
    t = theta_value(theta)
    s = power_sums(locus)
    s2, s3, s4 = s.s2, s.s3, s.s4
    u = 1.0 - t
    d = (1.0 + t) * (1.0 + 2.0 * t)

    p_match = math.fsum(
        [
            6.0 * t**3,
            t**2 * u * (2.0 + 9.0 * s2),
            2.0 * t * u**2 * (2.0 * s2 + s3),
            u**3 * (2.0 * s2 * s2 - s4),
        ]
    ) / d
    p_partial = math.fsum(
        [
            8.0 * t**2 * u * (1.0 - s2),
            4.0 * t * u**2 * (1.0 - s3),
            4.0 * u**3 * (s2 - s3 - s2 * s2 + s4),
        ]
    ) / d
    p_mismatch = math.fsum(
        [
            t**2 * u * (1.0 - s2),
            2.0 * t * u**2 * (1.0 - 2.0 * s2 + s3),
            u**3 * (1.0 - 4.0 * s2 + 4.0 * s3 + 2.0 * s2 * s2 - 3.0 * s4),
        ]
    ) / d
    return MatchClassProbs(match=p_match, partial=p_partial, mismatch=p_mismatch)


def conditional_match_prob(
    locus: LocusModel, theta: Union[ThetaModel, float], g: Genotype
) -> float:
    """Probability that a second individual has genotype g given that a
    first individual has genotype g."""
    denom = single_genotype_prob(locus, theta, g)
    if denom <= 0.0:
        raise ValueError(f"genotype {g} has zero probability")
    return genotype_pair_prob(locus, theta, g, g) / denom


def likelihood_ratio(conditional_prob: float) -> float:
    """Evidential weight of a profile match: the reciprocal of the
    conditional match probability."""
    if conditional_prob <= 0.0:
        raise ValueError("conditional match probability must be positive")
    return 1.0 / conditional_prob
