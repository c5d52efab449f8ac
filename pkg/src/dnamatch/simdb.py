"""Seedable synthetic offender-database generation.

Databases are built from a base frequency panel: each subpopulation
gets its own allele frequencies drawn from a Dirichlet distribution
centered on the base panel, individuals are sampled under random mating
within their subpopulation, and optional relative pairs are planted by
Mendelian transmission.

All randomness flows through a single numpy PCG64 generator seeded from
the configuration, with a fixed draw order:

1. subpopulation frequencies (subpopulation-major, locus-minor),
2. regular profiles (one block of uniforms, profile-major),
3. planted pairs in configuration order (founder, then relative).

Identical (seed, config, base) inputs therefore give identical output,
including byte-identical CSV files.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TextIO, Union

import numpy as np

from .freqmodel import FrequencySet, LocusModel, ThetaModel, theta_value

RNG_ALGORITHM = "numpy-pcg64-v1"

_FREQ_FLOOR = 1e-12  # guards against Dirichlet draws underflowing to 0

GENERATIVE_RELATIONSHIPS = ("parent-child", "full-sibs")


@dataclass(frozen=True)
class Profile:
    """One individual's genotypes, as canonical allele-index pairs in
    panel locus order."""

    id: str
    genotypes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for a, b in self.genotypes:
            if a > b:
                raise ValueError(f"profile {self.id!r}: genotype ({a},{b}) not canonical")


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one synthetic database."""

    seed: int
    n: int
    theta: float
    subpopulations: int = 1
    planted_relatives: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 profiles, got {self.n}")
        if self.subpopulations < 1:
            raise ValueError("need at least one subpopulation")
        theta_value(self.theta)
        for relationship, count in self.planted_relatives:
            if relationship not in GENERATIVE_RELATIONSHIPS:
                raise ValueError(
                    f"no generative recipe for relationship {relationship!r}"
                )
            if count < 0:
                raise ValueError("planted pair count must be >= 0")
        if 2 * self.total_planted_pairs > self.n:
            raise ValueError("planted pairs exceed half the database size")

    @property
    def total_planted_pairs(self) -> int:
        return sum(count for _, count in self.planted_relatives)


@dataclass(frozen=True)
class PlantedPair:
    id1: str
    id2: str
    relationship: str


@dataclass(frozen=True)
class SimulatedDatabase:
    """Profiles plus provenance: planted pairs, subpopulation membership
    and the RNG algorithm identifier."""

    profiles: tuple[Profile, ...]
    planted_pairs: tuple[PlantedPair, ...]
    subpopulation_of: tuple[int, ...]
    locus_names: tuple[str, ...]
    config: SimConfig
    rng_algorithm: str = RNG_ALGORITHM


def _cumulative(locus: LocusModel) -> np.ndarray:
    return np.cumsum(locus.freqs)


def _draw_index(cum: np.ndarray, u: float) -> int:
    return min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)


def sample_subpopulation_freqs(
    base: LocusModel, theta: Union[ThetaModel, float], rng: np.random.Generator
) -> LocusModel:
    """Draw one subpopulation's allele frequencies around the base locus.

    Frequencies come from a Dirichlet with mean equal to the base
    frequencies and variance theta * p * (1 - p) per allele, which fixes
    the concentration parameters at alpha_i = p_i * (1 - theta) / theta.
    Vanishingly small draws are floored at _FREQ_FLOOR and the vector
    renormalized, so the result is always a valid locus model.
    """
    t = theta_value(theta)
    if t == 0.0:
        warnings.warn(
            f"theta = 0: subpopulation frequencies equal the base for locus "
            f"{base.name!r}",
            stacklevel=2,
        )
        return base
    alpha = base.freqs * (1.0 - t) / t
    draw = rng.dirichlet(alpha)
    draw = np.maximum(draw, _FREQ_FLOOR)
    draw = draw / draw.sum()
    return LocusModel(name=base.name, alleles=base.alleles, freqs=draw)


def sample_profile(
    freqs: FrequencySet, rng: np.random.Generator, profile_id: str = "P1"
) -> Profile:
    """Sample one individual: two independent allele draws per locus."""
    u = rng.random((len(freqs), 2))
    genotypes = []
    for l, locus in enumerate(freqs):
        cum = _cumulative(locus)
        a = _draw_index(cum, u[l, 0])
        b = _draw_index(cum, u[l, 1])
        genotypes.append((a, b) if a <= b else (b, a))
    return Profile(id=profile_id, genotypes=tuple(genotypes))


def sample_relative(
    source: Profile,
    relationship: str,
    freqs: FrequencySet,
    rng: np.random.Generator,
    child_id: str = "P2",
) -> Profile:
    """Sample a relative of an existing profile.

    parent-child: at each locus the child receives one of the source's
    alleles (chosen uniformly) plus one fresh population draw.

    full-sibs: the source's alleles are treated as coming one from each
    of two parents, whose untransmitted alleles are fresh population
    draws; the sib receives a uniform pick from each parent. Each locus
    consumes a fixed number of variates (coins first, then fresh-draw
    uniforms) regardless of which alleles are selected.
    """
    if relationship not in GENERATIVE_RELATIONSHIPS:
        raise ValueError(f"no generative recipe for relationship {relationship!r}")
    L = len(freqs)
    if len(source.genotypes) != L:
        raise ValueError("source profile does not cover the frequency panel")

    genotypes = []
    if relationship == "parent-child":
        coins = rng.integers(0, 2, size=L)
        u = rng.random(L)
        for l, locus in enumerate(freqs):
            transmitted = source.genotypes[l][coins[l]]
            fresh = _draw_index(_cumulative(locus), u[l])
            pair = (transmitted, fresh)
            genotypes.append(pair if pair[0] <= pair[1] else (pair[1], pair[0]))
    else:  # full-sibs
        coins = rng.integers(0, 2, size=(L, 2))
        u = rng.random((L, 2))
        for l, locus in enumerate(freqs):
            cum = _cumulative(locus)
            sib_alleles = []
            for side in (0, 1):
                if coins[l, side] == 0:
                    sib_alleles.append(source.genotypes[l][side])
                else:
                    sib_alleles.append(_draw_index(cum, u[l, side]))
            a, b = sib_alleles
            genotypes.append((a, b) if a <= b else (b, a))
    return Profile(id=child_id, genotypes=tuple(genotypes))


def _realized_panels(
    config: SimConfig, base: FrequencySet, rng: np.random.Generator
) -> list[FrequencySet]:
    """One realized frequency panel per subpopulation."""
    if config.theta == 0.0:
        return [base] * config.subpopulations
    panels = []
    for _ in range(config.subpopulations):
        loci = tuple(
            sample_subpopulation_freqs(locus, config.theta, rng) for locus in base
        )
        panels.append(FrequencySet(loci=loci))
    return panels


def generate_database(config: SimConfig, base: FrequencySet) -> SimulatedDatabase:
    """Generate a full synthetic database.

    Regular profiles are assigned to subpopulations round-robin by index;
    planted pairs are generated last, both members inside a single
    subpopulation chosen round-robin by pair index.
    """
    rng = np.random.default_rng(config.seed)
    K = config.subpopulations
    L = len(base)
    panels = _realized_panels(config, base, rng)
    cums = [[_cumulative(locus) for locus in panel] for panel in panels]

    n_planted = 2 * config.total_planted_pairs
    n_regular = config.n - n_planted
    width = len(str(config.n))

    def make_id(index: int) -> str:
        return f"P{index + 1:0{width}d}"

    profiles: list[Profile] = []
    subpop_of: list[int] = []

    u = rng.random((n_regular, L, 2))
    for i in range(n_regular):
        k = i % K
        genotypes = []
        for l in range(L):
            cum = cums[k][l]
            a = _draw_index(cum, u[i, l, 0])
            b = _draw_index(cum, u[i, l, 1])
            genotypes.append((a, b) if a <= b else (b, a))
        profiles.append(Profile(id=make_id(i), genotypes=tuple(genotypes)))
        subpop_of.append(k)

    planted: list[PlantedPair] = []
    pair_index = 0
    next_index = n_regular
    for relationship, count in config.planted_relatives:
        for _ in range(count):
            k = pair_index % K
            founder = sample_profile(panels[k], rng, make_id(next_index))
            relative = sample_relative(
                founder, relationship, panels[k], rng, make_id(next_index + 1)
            )
            profiles.extend([founder, relative])
            subpop_of.extend([k, k])
            planted.append(
                PlantedPair(id1=founder.id, id2=relative.id, relationship=relationship)
            )
            next_index += 2
            pair_index += 1

    return SimulatedDatabase(
        profiles=tuple(profiles),
        planted_pairs=tuple(planted),
        subpopulation_of=tuple(subpop_of),
        locus_names=base.locus_names,
        config=config,
    )


def write_profiles_csv(
    stream: TextIO, db: SimulatedDatabase, base: FrequencySet
) -> None:
    """Write profiles as CSV: header ``id,<locus>,...``, cells ``a/b``
    in canonical order, with generation parameters as comments."""
    config = db.config
    stream.write(f"# rng {db.rng_algorithm}\n")
    stream.write(f"# seed {config.seed}\n")
    stream.write(f"# theta {config.theta!r}\n")
    stream.write(f"# subpopulations {config.subpopulations}\n")
    stream.write("id," + ",".join(db.locus_names) + "\n")
    loci = list(base)
    for profile in db.profiles:
        cells = [profile.id]
        for locus, (a, b) in zip(loci, profile.genotypes):
            cells.append(f"{locus.alleles[a]}/{locus.alleles[b]}")
        stream.write(",".join(cells) + "\n")


def write_manifest_csv(stream: TextIO, db: SimulatedDatabase) -> None:
    """Write the planted-pair manifest: ``id1,id2,relationship``."""
    stream.write(f"# rng {db.rng_algorithm}\n")
    stream.write("id1,id2,relationship\n")
    for pair in db.planted_pairs:
        stream.write(f"{pair.id1},{pair.id2},{pair.relationship}\n")
