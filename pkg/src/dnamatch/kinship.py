"""Match probabilities for pairs of relatives.

Non-inbred relatives are described by the probabilities (k2, k1, k0) of
sharing 2, 1 or 0 pairs of alleles identical by descent. Inbred pairs
need the full set of nine identity-state probabilities over the four
alleles the two individuals carry. Coefficients are stored as exact
rationals so the sum-to-one invariant is exact; they are converted to
floats only when a probability is evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import numpy as np

from .freqmodel import FrequencySet, LocusModel, ThetaModel, power_sums, theta_value
from .locusmatch import MatchClassProbs, match_class_probs

RationalLike = Union[int, Fraction, Rational]


def _as_fraction(value: RationalLike, what: str) -> Fraction:
    f = Fraction(value)
    if not 0 <= f <= 1:
        raise ValueError(f"{what} must lie in [0, 1], got {f}")
    return f


@dataclass(frozen=True)
class KinshipCoefficients:
    """Probabilities of sharing 2, 1 or 0 allele pairs identical by descent."""

    k2: Fraction
    k1: Fraction
    k0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k2", _as_fraction(self.k2, "k2"))
        object.__setattr__(self, "k1", _as_fraction(self.k1, "k1"))
        object.__setattr__(self, "k0", _as_fraction(self.k0, "k0"))
        if self.k2 + self.k1 + self.k0 != 1:
            raise ValueError(
                f"k2 + k1 + k0 must equal 1 exactly, got {self.k2 + self.k1 + self.k0}"
            )


@dataclass(frozen=True)
class DeltaCoefficients:
    """The nine identity-state probabilities for a possibly inbred pair.

    State 1 is all four alleles identical by descent; state 9 is no
    identity by descent at all. States 7, 8, 9 are the non-inbred ones.
    """

    d1: Fraction
    d2: Fraction
    d3: Fraction
    d4: Fraction
    d5: Fraction
    d6: Fraction
    d7: Fraction
    d8: Fraction
    d9: Fraction

    def __post_init__(self):
        total = Fraction(0)
        for name in self.__dataclass_fields__:
            value = _as_fraction(getattr(self, name), name)
            object.__setattr__(self, name, value)
            total += value
        if total != 1:
            raise ValueError(f"identity-state probabilities must sum to 1, got {total}")

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (
            self.d1, self.d2, self.d3, self.d4, self.d5,
            self.d6, self.d7, self.d8, self.d9,
        )

    @classmethod
    def from_kinship(cls, k: KinshipCoefficients) -> "DeltaCoefficients":
        """Embed non-inbred coefficients: states 7, 8, 9 carry k2, k1, k0."""
        zero = Fraction(0)
        return cls(zero, zero, zero, zero, zero, zero, k.k2, k.k1, k.k0)


RELATIONSHIPS: dict[str, KinshipCoefficients] = {
    "identical-twins": KinshipCoefficients(Fraction(1), Fraction(0), Fraction(0)),
    "full-sibs": KinshipCoefficients(Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)),
    "parent-child": KinshipCoefficients(Fraction(0), Fraction(1), Fraction(0)),
    "double-first-cousins": KinshipCoefficients(
        Fraction(1, 16), Fraction(3, 8), Fraction(9, 16)
    ),
    "half-sibs": KinshipCoefficients(Fraction(0), Fraction(1, 2), Fraction(1, 2)),
    "grandparent-grandchild": KinshipCoefficients(
        Fraction(0), Fraction(1, 2), Fraction(1, 2)
    ),
    "uncle-nephew": KinshipCoefficients(Fraction(0), Fraction(1, 2), Fraction(1, 2)),
    "first-cousins": KinshipCoefficients(Fraction(0), Fraction(1, 4), Fraction(3, 4)),
    "unrelated": KinshipCoefficients(Fraction(0), Fraction(0), Fraction(1)),
}


def named_relationship(name: str) -> KinshipCoefficients:
    """Look up the identity coefficients for a common family relationship."""
    try:
        return RELATIONSHIPS[name]
    except KeyError:
        known = ", ".join(sorted(RELATIONSHIPS))
        raise ValueError(f"unknown relationship {name!r}; known: {known}") from None


def kin_match_probs(
    locus: LocusModel,
    theta: Union[ThetaModel, float],
    k: KinshipCoefficients,
) -> MatchClassProbs:
    """Match-class probabilities for a non-inbred related pair.

    A shared ibd pair forces the corresponding alleles to the same type;
    the remaining free alleles behave like draws for unrelated people.
    """
    t = theta_value(theta)
    s2 = power_sums(locus).s2
    base = match_class_probs(locus, t)
    k2, k1, k0 = float(k.k2), float(k.k1), float(k.k0)
    same_type = t + (1.0 - t) * s2  # two draws agree in type
    diff_type = (1.0 - t) * (1.0 - s2)
    return MatchClassProbs(
        match=k2 + k1 * same_type + k0 * base.match,
        partial=k1 * diff_type + k0 * base.partial,
        mismatch=k0 * base.mismatch,
    )


def delta_match_probs(
    locus: LocusModel,
    theta: Union[ThetaModel, float],
    d: DeltaCoefficients,
) -> MatchClassProbs:
    """Match-class probabilities for a possibly inbred related pair.

    States with three free lineages (one individual autozygous, the
    other unconstrained) contribute three-draw terms with denominator
    (1 + theta); the fully free state falls back to the unrelated
    closed forms.
    """
    t = theta_value(theta)
    s = power_sums(locus)
    s2, s3 = s.s2, s.s3
    base = match_class_probs(locus, t)
    u = 1.0 - t

    same_type = t + u * s2
    diff_type = u * (1.0 - s2)
    # one autozygous individual vs. two free draws (states 4 and 6)
    auto_match = (2.0 * t * t + 3.0 * t * u * s2 + u * u * s3) / (1.0 + t)
    auto_partial = 2.0 * u / (1.0 + t) * (t + (1.0 - 2.0 * t) * s2 - u * s3)
    auto_mismatch = u / (1.0 + t) * (1.0 - (2.0 - t) * s2 + u * s3)

    d1, d2, d3, d4, d5, d6, d7, d8, d9 = (float(x) for x in d.as_tuple())
    return MatchClassProbs(
        match=(d1 + d7)
        + (d2 + d3 + d5 + d8) * same_type
        + (d4 + d6) * auto_match
        + d9 * base.match,
        partial=(d3 + d5 + d8) * diff_type
        + (d4 + d6) * auto_partial
        + d9 * base.partial,
        mismatch=d2 * diff_type + (d4 + d6) * auto_mismatch + d9 * base.mismatch,
    )


@dataclass(frozen=True)
class MultiLocusKinMatch:
    """Per-locus match probabilities for a relationship and their product."""

    locus_names: tuple[str, ...]
    per_locus: np.ndarray
    product: float


def multi_locus_kin_match(
    freqs: FrequencySet,
    theta: Union[ThetaModel, float],
    k: KinshipCoefficients,
) -> MultiLocusKinMatch:
    """Match probability per locus and across the panel, assuming loci
    are independent."""
    per_locus = np.array(
        [kin_match_probs(locus, theta, k).match for locus in freqs], dtype=float
    )
    return MultiLocusKinMatch(
        locus_names=freqs.locus_names,
        per_locus=per_locus,
        product=float(np.prod(per_locus)),
    )
