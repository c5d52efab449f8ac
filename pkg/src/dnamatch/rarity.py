"""Island-problem posteriors for a profile found in a population.

Two classic treatments of "a matching person has been found, is he the
source?": the Poisson 1/x argument conditioned on at least one carrier,
and the uniqueness posterior that conditions on the suspect himself
carrying the profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_REL_TOL = 1e-16  # series term / partial sum cutoff


@dataclass(frozen=True)
class IslandScenario:
    """A found profile in a population of population_size other people,
    each carrying the profile independently with probability profile_prob."""

    population_size: int
    profile_prob: float

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError(f"population size must be >= 1, got {self.population_size}")
        if not 0.0 < self.profile_prob < 1.0:
            raise ValueError(
                f"profile probability must be in (0, 1), got {self.profile_prob}"
            )

    @property
    def poisson_mean(self) -> float:
        """Expected number of carriers; always derived, never stored."""
        return self.population_size * self.profile_prob


def kingston_posterior(poisson_mean: float) -> float:
    """E[1/x | x >= 1] for x Poisson with the given mean.

    The number of profile carriers is modeled as Poisson; given that at
    least one exists, the chance the right one was found is 1/x. Terms
    are evaluated in the log domain so large means do not overflow, and
    summation stops once a term falls below _REL_TOL of the partial sum
    past the mode.
    """
    lam = float(poisson_mean)
    if lam <= 0.0:
        raise ValueError(f"Poisson mean must be positive, got {lam}")
    log_lam = math.log(lam)
    total = 0.0
    x = 1
    while True:
        log_term = x * log_lam - math.lgamma(x + 1) - lam - math.log(x)
        term = math.exp(log_term)
        total += term
        if x > lam and term < _REL_TOL * total:
            break
        x += 1
        if x > 10_000_000:
            raise RuntimeError("Poisson series failed to converge")
    return total / -math.expm1(-lam)


@dataclass(frozen=True)
class BaldingUniqueness:
    """Posterior probability of uniqueness together with its simple
    lower bound 1 - 2*lambda."""

    probability: float
    lower_bound: float


def balding_uniqueness(scenario: IslandScenario) -> BaldingUniqueness:
    """Probability that the found carrier is unique in the population.

    The posterior is (1 - P)^N / (1 + N*P). The power is evaluated as
    exp(N * log1p(-P)) so tiny P and huge N do not lose precision.
    """
    N = scenario.population_size
    P = scenario.profile_prob
    lam = scenario.poisson_mean
    probability = math.exp(N * math.log1p(-P)) / (1.0 + lam)
    return BaldingUniqueness(probability=probability, lower_bound=1.0 - 2.0 * lam)
