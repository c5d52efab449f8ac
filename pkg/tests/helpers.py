"""Shared test utilities: random locus construction, vectorized
match-class counting, and the pair-dependence-aware standard error for
empirical match-class frequencies."""

from __future__ import annotations

import math

import numpy as np

from dnamatch.freqmodel import LocusModel
from dnamatch.reference import classify_by_sets

THETA_GRID = (0.0, 0.001, 0.01, 0.03, 0.3, 0.5)
TABLE1_THETA_GRID = (0.0, 0.001, 0.005, 0.01, 0.03)


def random_locus(rng: np.random.Generator, n_alleles: int, name: str = "R") -> LocusModel:
    """A locus with Dirichlet-random frequencies, away from degenerate corners."""
    freqs = rng.dirichlet(np.full(n_alleles, 1.5))
    freqs = np.maximum(freqs, 1e-6)
    freqs = freqs / freqs.sum()
    labels = tuple(f"a{k}" for k in range(n_alleles))
    return LocusModel(name=name, alleles=labels, freqs=freqs)


def classify_arrays(
    a1: np.ndarray, b1: np.ndarray, a2: np.ndarray, b2: np.ndarray
) -> np.ndarray:
    """Vectorized match class (0 mismatch, 1 partial, 2 match) for
    canonical genotype arrays."""
    lo1, hi1 = np.minimum(a1, b1), np.maximum(a1, b1)
    lo2, hi2 = np.minimum(a2, b2), np.maximum(a2, b2)
    match = (lo1 == lo2) & (hi1 == hi2)
    share = (lo1 == lo2) | (lo1 == hi2) | (hi1 == lo2) | (hi1 == hi2)
    return np.where(match, 2, np.where(share, 1, 0))


def class_freqs(classes: np.ndarray) -> tuple[float, float, float]:
    """Empirical (match, partial, mismatch) frequencies."""
    n = classes.size
    return (
        float((classes == 2).sum()) / n,
        float((classes == 1).sum()) / n,
        float((classes == 0).sum()) / n,
    )


def simulate_related_pairs(
    rng: np.random.Generator, freqs: np.ndarray, relationship: str, n: int
) -> np.ndarray:
    """Vectorized Mendelian simulation of related pairs at one locus with
    random-mating founders; returns match classes per pair."""
    m = len(freqs)
    father = rng.choice(m, size=(n, 2), p=freqs)
    mother = rng.choice(m, size=(n, 2), p=freqs)

    def child():
        fi = rng.integers(0, 2, size=n)
        mi = rng.integers(0, 2, size=n)
        return father[np.arange(n), fi], mother[np.arange(n), mi]

    if relationship == "parent-child":
        g1 = (father[:, 0], father[:, 1])
        g2 = child()
    elif relationship == "full-sibs":
        g1 = child()
        g2 = child()
    else:
        raise ValueError(relationship)
    return classify_arrays(g1[0], g1[1], g2[0], g2[1])


def hwe_genotype_probs(locus: LocusModel) -> dict[tuple[int, int], float]:
    p = locus.freqs
    out = {}
    for a in range(locus.n_alleles):
        for b in range(a, locus.n_alleles):
            out[(a, b)] = float(p[a] * p[b] if a == b else 2 * p[a] * p[b])
    return out


def pairwise_class_se(locus: LocusModel, n: int) -> tuple[float, float, float]:
    """Standard errors of empirical (match, partial, mismatch)
    frequencies over all C(n, 2) pairs of n random-mating profiles.

    Pairs sharing a profile are correlated, so the class frequency is a
    U-statistic: Var = (4(n-2) zeta1 + 2 zeta2) / (n(n-1)) with
    zeta1 = Var over a profile of its conditional class probability and
    zeta2 the single-pair Bernoulli variance. A plain binomial standard
    error understates the spread by an unbounded factor as n grows.
    """
    f = hwe_genotype_probs(locus)
    genotypes = list(f)
    ses = []
    for cls in (2, 1, 0):
        h = {
            g: sum(f[g2] for g2 in genotypes if classify_by_sets(g, g2) == cls)
            for g in genotypes
        }
        q = sum(f[g] * h[g] for g in genotypes)
        zeta1 = sum(f[g] * h[g] ** 2 for g in genotypes) - q * q
        zeta2 = q * (1.0 - q)
        var = (4.0 * (n - 2) * zeta1 + 2.0 * zeta2) / (n * (n - 1))
        ses.append(math.sqrt(max(var, 1e-30)))
    return tuple(ses)
