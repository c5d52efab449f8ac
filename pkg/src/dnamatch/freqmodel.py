"""Allele-frequency tables and their summary statistics.

Loads per-locus allele frequencies from CSV, validates and normalizes
them, and computes the power sums and finite-sample genotype-frequency
expectations used by the match-probability formulas.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Iterable, TextIO, Union

import numpy as np

# Published tables are rounded, so per-locus sums may be slightly off 1.
# Sums within this tolerance are silently renormalized; anything worse
# is treated as a broken input.
SUM_TOLERANCE = 0.01

CSV_HEADER = ("locus", "allele", "frequency")


class FrequencyFormatError(ValueError):
    """Malformed or inconsistent allele-frequency input."""


@dataclass(frozen=True)
class ThetaModel:
    """Coancestry coefficient, shared across all probability computations."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must be in [0, 1), got {self.theta}")


def theta_value(theta: Union[ThetaModel, float]) -> float:
    """Accept a ThetaModel or bare float and return the validated value."""
    if isinstance(theta, ThetaModel):
        return theta.theta
    t = float(theta)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"theta must be in [0, 1), got {t}")
    return t


@dataclass(frozen=True)
class PowerSums:
    """Sums of squared, cubed and fourth powers of allele frequencies."""

    s2: float
    s3: float
    s4: float


@dataclass(frozen=True, eq=False)
class LocusModel:
    """Allele labels and frequencies for one locus.

    Labels are opaque strings compared for exact equality; numeric STR
    repeat labels such as "9.3" are never parsed as numbers. Frequencies
    are strictly positive and sum to 1.
    """

    name: str
    alleles: tuple[str, ...]
    freqs: np.ndarray

    def __post_init__(self):
        if len(self.alleles) < 1:
            raise ValueError(f"locus {self.name!r}: needs at least one allele")
        if len(set(self.alleles)) != len(self.alleles):
            raise ValueError(f"locus {self.name!r}: duplicate allele labels")
        freqs = np.asarray(self.freqs, dtype=float)
        if freqs.shape != (len(self.alleles),):
            raise ValueError(
                f"locus {self.name!r}: {len(self.alleles)} alleles but "
                f"{freqs.size} frequencies"
            )
        if np.any(freqs <= 0.0) or np.any(freqs > 1.0):
            raise ValueError(f"locus {self.name!r}: frequencies must lie in (0, 1]")
        if abs(float(freqs.sum()) - 1.0) > 1e-9:
            raise ValueError(
                f"locus {self.name!r}: frequencies sum to {freqs.sum()!r}, not 1"
            )
        freqs.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(
            self, "_label_index", {label: k for k, label in enumerate(self.alleles)}
        )

    @property
    def n_alleles(self) -> int:
        return len(self.alleles)

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"locus {self.name!r}: unknown allele {label!r}") from None

    @classmethod
    def from_counts_or_rounded(
        cls, name: str, alleles: Iterable[str], freqs: Iterable[float]
    ) -> "LocusModel":
        """Build a locus from possibly-rounded frequencies.

        Sums within SUM_TOLERANCE of 1 are renormalized; anything else
        raises FrequencyFormatError.
        """
        alleles = tuple(alleles)
        arr = np.asarray(list(freqs), dtype=float)
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise FrequencyFormatError(
                f"locus {name!r}: frequency sum {total:.6g} out of tolerance "
                f"(must be within {SUM_TOLERANCE:g} of 1)"
            )
        return cls(name=name, alleles=alleles, freqs=arr / total)


@dataclass(frozen=True, eq=False)
class FrequencySet:
    """An ordered panel of loci; order is preserved from the input."""

    loci: tuple[LocusModel, ...]

    def __post_init__(self):
        names = [locus.name for locus in self.loci]
        if len(set(names)) != len(names):
            raise ValueError("duplicate locus names in frequency set")

    def __len__(self) -> int:
        return len(self.loci)

    def __iter__(self):
        return iter(self.loci)

    @property
    def locus_names(self) -> tuple[str, ...]:
        return tuple(locus.name for locus in self.loci)

    def locus(self, name: str) -> LocusModel:
        for candidate in self.loci:
            if candidate.name == name:
                return candidate
        raise KeyError(f"no locus named {name!r}")


def load_frequency_set(source: Union[str, os.PathLike, TextIO]) -> FrequencySet:
    """Parse a frequency CSV (header ``locus,allele,frequency``).

    Rows for a locus need not be contiguous; lines starting with ``#``
    are comments. Each locus' frequencies are renormalized if their sum
    is within SUM_TOLERANCE of 1, otherwise the file is rejected.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_frequency_set(handle)

    rows = _read_rows(source)
    order: list[str] = []
    alleles: dict[str, list[str]] = {}
    freqs: dict[str, list[float]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, (locus, allele, raw_freq) in rows:
        if (locus, allele) in seen:
            raise FrequencyFormatError(
                f"line {lineno}: duplicate entry for ({locus!r}, {allele!r})"
            )
        seen.add((locus, allele))
        try:
            freq = float(raw_freq)
        except ValueError:
            raise FrequencyFormatError(
                f"line {lineno}: frequency {raw_freq!r} is not a number"
            ) from None
        if not 0.0 < freq <= 1.0:
            raise FrequencyFormatError(
                f"line {lineno}: frequency {freq!r} outside (0, 1]"
            )
        if locus not in alleles:
            order.append(locus)
            alleles[locus] = []
            freqs[locus] = []
        alleles[locus].append(allele)
        freqs[locus].append(freq)

    if not order:
        raise FrequencyFormatError("no frequency rows found")
    loci = tuple(
        LocusModel.from_counts_or_rounded(name, alleles[name], freqs[name])
        for name in order
    )
    return FrequencySet(loci=loci)


def _read_rows(stream: TextIO):
    """Yield (lineno, (locus, allele, frequency)) tuples, checking the header."""
    filtered = []
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        filtered.append((lineno, line))
    if not filtered:
        raise FrequencyFormatError("empty frequency file")

    header_lineno, header_line = filtered[0]
    header = next(csv.reader(io.StringIO(header_line)))
    if tuple(h.strip().lower() for h in header) != CSV_HEADER:
        raise FrequencyFormatError(
            f"line {header_lineno}: expected header {','.join(CSV_HEADER)!r}, "
            f"got {header_line.strip()!r}"
        )
    out = []
    for lineno, line in filtered[1:]:
        fields = next(csv.reader(io.StringIO(line)))
        if len(fields) != 3:
            raise FrequencyFormatError(
                f"line {lineno}: expected 3 fields, got {len(fields)}"
            )
        out.append((lineno, (fields[0].strip(), fields[1].strip(), fields[2].strip())))
    return out


def power_sums(locus: LocusModel) -> PowerSums:
    """Sums of the k-th powers of the locus frequencies, k = 2, 3, 4.

    Summation runs left to right in input allele order.
    """
    s2 = 0.0
    s3 = 0.0
    s4 = 0.0
    for p in locus.freqs:
        p = float(p)
        p2 = p * p
        s2 += p2
        s3 += p2 * p
        s4 += p2 * p2
    return PowerSums(s2=s2, s3=s3, s4=s4)


def expected_sample_genotype_freq(
    locus: LocusModel,
    theta: Union[ThetaModel, float],
    n: int,
    i: int,
    j: int,
) -> float:
    """Expected genotype-frequency estimate from a sample of n genotypes.

    The naive estimators are p~i**2 for a homozygote and 2*p~i*p~j for a
    heterozygote, where p~ are sample allele frequencies. Averaging over
    repeated samples and over replicate populations gives

        E[p~i**2]    = pi**2 + pi*(1 - pi) * (1 + (2n - 1)*theta) / (2n)
        E[2*p~i*p~j] = 2*pi*pj * (1 - (1 + (2n - 1)*theta) / (2n))

    which tend to pi**2 + theta*pi*(1 - pi) and 2*pi*pj*(1 - theta) as
    the sample grows.
    """
    t = theta_value(theta)
    if n < 1:
        raise ValueError(f"sample size n must be >= 1, got {n}")
    m = locus.n_alleles
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"allele index out of range for locus {locus.name!r}")
    adjustment = (1.0 + (2.0 * n - 1.0) * t) / (2.0 * n)
    pi = float(locus.freqs[i])
    if i == j:
        return pi * pi + pi * (1.0 - pi) * adjustment
    pj = float(locus.freqs[j])
    return 2.0 * pi * pj * (1.0 - adjustment)
