"""Brute-force reference implementations used to cross-check the fast paths.

Everything here trades speed for obviousness: explicit enumeration of
allele draw sequences, a naive double-loop pair scanner, and a full
3**L expansion of the multi-locus match-count distribution. These are
deliverable test utilities, not internal fallbacks.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .freqmodel import LocusModel, ThetaModel, theta_value
from .locusmatch import Genotype, MatchClassProbs, canonical_genotype

MISMATCH, PARTIAL, MATCH = 0, 1, 2


def classify_by_sets(g1: Genotype, g2: Genotype) -> int:
    """Match class from plain set logic (independent of matcher's integer path)."""
    s1 = frozenset(g1)
    s2 = frozenset(g2)
    if canonical_genotype(g1) == canonical_genotype(g2):
        return MATCH
    if s1 & s2:
        return PARTIAL
    return MISMATCH


def _sequence_prob_enum(locus: LocusModel, t: float, order: Sequence[int]) -> float:
    prob = 1.0
    counts: dict[int, int] = {}
    for n, idx in enumerate(order):
        p = float(locus.freqs[idx])
        if n == 0:
            prob *= p
        else:
            prob *= (counts.get(idx, 0) * t + (1.0 - t) * p) / (1.0 + (n - 1) * t)
        counts[idx] = counts.get(idx, 0) + 1
    return prob


def enumerate_match_class_probs(
    locus: LocusModel, theta: ThetaModel | float
) -> MatchClassProbs:
    """Match-class probabilities by summing over all ordered 4-tuples of draws."""
    t = theta_value(theta)
    m = locus.n_alleles
    totals = [0.0, 0.0, 0.0]
    for tup in itertools.product(range(m), repeat=4):
        prob = _sequence_prob_enum(locus, t, tup)
        cls = classify_by_sets((tup[0], tup[1]), (tup[2], tup[3]))
        totals[cls] += prob
    return MatchClassProbs(
        match=totals[MATCH], partial=totals[PARTIAL], mismatch=totals[MISMATCH]
    )


def enumerate_genotype_pair_prob(
    locus: LocusModel, theta: ThetaModel | float, g1: Genotype, g2: Genotype
) -> float:
    """Probability of the unordered genotype pair by explicit tuple enumeration."""
    t = theta_value(theta)
    m = locus.n_alleles
    want1 = canonical_genotype(g1)
    want2 = canonical_genotype(g2)
    total = 0.0
    for tup in itertools.product(range(m), repeat=4):
        if canonical_genotype((tup[0], tup[1])) != want1:
            continue
        if canonical_genotype((tup[2], tup[3])) != want2:
            continue
        total += _sequence_prob_enum(locus, t, tup)
    return total


def enumerate_single_genotype_prob(
    locus: LocusModel, theta: ThetaModel | float, g: Genotype
) -> float:
    t = theta_value(theta)
    m = locus.n_alleles
    want = canonical_genotype(g)
    total = 0.0
    for tup in itertools.product(range(m), repeat=2):
        if canonical_genotype(tup) == want:
            total += _sequence_prob_enum(locus, t, tup)
    return total


# The nine identity states for a pair of (possibly inbred) relatives, as
# (ind1 pattern, ind2 pattern, cross links). Each state maps to the
# number of distinct allelic lineages and how the four observed alleles
# (a, b) and (c, d) are built from them. Lineages are drawn sequentially;
# draw order does not matter by exchangeability.
#   state index -> function(lineage draws) -> ((a, b), (c, d))
_IDENTITY_STATES = {
    1: (1, lambda v: ((v[0], v[0]), (v[0], v[0]))),  # all four ibd
    2: (2, lambda v: ((v[0], v[0]), (v[1], v[1]))),  # within both, not across
    3: (2, lambda v: ((v[0], v[0]), (v[0], v[1]))),  # ind1 ibd pair + one cross link
    4: (3, lambda v: ((v[0], v[0]), (v[1], v[2]))),  # ind1 ibd pair only
    5: (2, lambda v: ((v[0], v[1]), (v[0], v[0]))),  # ind2 ibd pair + one cross link
    6: (3, lambda v: ((v[0], v[1]), (v[2], v[2]))),  # ind2 ibd pair only
    7: (2, lambda v: ((v[0], v[1]), (v[0], v[1]))),  # two cross pairs
    8: (3, lambda v: ((v[0], v[1]), (v[0], v[2]))),  # one cross pair
    9: (4, lambda v: ((v[0], v[1]), (v[2], v[3]))),  # none ibd
}


def enumerate_identity_state_class_probs(
    locus: LocusModel, theta: ThetaModel | float, state: int
) -> MatchClassProbs:
    """Match-class probabilities for one of the nine pair identity states,
    by enumerating the free lineage draws."""
    t = theta_value(theta)
    n_lineages, build = _IDENTITY_STATES[state]
    m = locus.n_alleles
    totals = [0.0, 0.0, 0.0]
    for tup in itertools.product(range(m), repeat=n_lineages):
        prob = _sequence_prob_enum(locus, t, tup)
        g1, g2 = build(tup)
        totals[classify_by_sets(g1, g2)] += prob
    return MatchClassProbs(
        match=totals[MATCH], partial=totals[PARTIAL], mismatch=totals[MISMATCH]
    )


def enumerate_delta_match_probs(
    locus: LocusModel, theta: ThetaModel | float, deltas: Sequence[Fraction | float]
) -> MatchClassProbs:
    """Mixture of the nine identity-state class probabilities."""
    if len(deltas) != 9:
        raise ValueError("need nine identity-state probabilities")
    acc = [0.0, 0.0, 0.0]
    for state, weight in zip(range(1, 10), deltas):
        w = float(weight)
        if w == 0.0:
            continue
        probs = enumerate_identity_state_class_probs(locus, theta, state)
        acc[MATCH] += w * probs.match
        acc[PARTIAL] += w * probs.partial
        acc[MISMATCH] += w * probs.mismatch
    return MatchClassProbs(match=acc[MATCH], partial=acc[PARTIAL], mismatch=acc[MISMATCH])


def brute_force_joint_distribution(
    class_probs: Sequence[MatchClassProbs],
) -> np.ndarray:
    """Match-count distribution q[m, p] by expanding all 3**L outcomes."""
    L = len(class_probs)
    q = np.zeros((L + 1, L + 1))
    for outcome in itertools.product((MATCH, PARTIAL, MISMATCH), repeat=L):
        prob = 1.0
        m = 0
        p = 0
        for cls, probs in zip(outcome, class_probs):
            if cls == MATCH:
                prob *= probs.match
                m += 1
            elif cls == PARTIAL:
                prob *= probs.partial
                p += 1
            else:
                prob *= probs.mismatch
        q[m, p] += prob
    return q


def naive_scan(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs histogram by a plain double loop over profiles.

    a and b hold the low and high allele ids per (profile, locus).
    Returns (histogram[m, p], per_locus_counts[locus, class]).
    """
    n, L = a.shape
    hist = np.zeros((L + 1, L + 1), dtype=np.int64)
    per_locus = np.zeros((L, 3), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            m = 0
            p = 0
            for l in range(L):
                cls = classify_by_sets(
                    (int(a[i, l]), int(b[i, l])), (int(a[j, l]), int(b[j, l]))
                )
                per_locus[l, cls] += 1
                if cls == MATCH:
                    m += 1
                elif cls == PARTIAL:
                    p += 1
            hist[m, p] += 1
    return hist, per_locus
