"""All-pairs profile comparison and match-count histograms.

Profiles are packed into per-locus allele-id pairs (one byte each) so
the all-pairs scan runs as a branch-free numba kernel over blocks of
profile rows. Each block accumulates a private histogram; block
results are summed in fixed order, so the histogram is identical for
any worker count.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Sequence, TextIO, Union

import numpy as np
from numba import njit, prange

from .freqmodel import FrequencySet
from .simdb import Profile

_PAD_LANES = 16  # kernel lane count; unused lanes are forced matches
_PAD_VALUE = 255  # reserved allele id marking a padding lane
MAX_ALLELES = 255  # dense ids must stay below the padding value

DEFAULT_BLOCKS = 16
FLAG_SIGMAS = 3.0


class MatchClass(enum.IntEnum):
    MISMATCH = 0
    PARTIAL = 1
    MATCH = 2


def classify_pair_locus(
    g1: tuple[int, int], g2: tuple[int, int]
) -> MatchClass:
    """Classify two single-locus genotypes.

    Match: identical unordered pairs. Partial: any shared allele type
    without being identical (AA vs AB and AB vs AC are partial).
    Mismatch: no allele type in common.
    """
    a1, b1 = min(g1), max(g1)
    a2, b2 = min(g2), max(g2)
    if a1 == a2 and b1 == b2:
        return MatchClass.MATCH
    if a1 == a2 or a1 == b2 or b1 == a2 or b1 == b2:
        return MatchClass.PARTIAL
    return MatchClass.MISMATCH


@dataclass(frozen=True, eq=False)
class PackedProfileSet:
    """Profiles packed for scanning: low/high allele ids per (profile, locus).

    Dense allele ids are local to the set; ``allele_labels[l][id]``
    recovers the original label, and the (a, b) pair round-trips the
    genotype. Token equality (equal a and equal b) is exactly genotype
    identity.
    """

    ids: tuple[str, ...]
    locus_names: tuple[str, ...]
    allele_labels: tuple[tuple[str, ...], ...]
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        n, L = self.a.shape
        if self.b.shape != (n, L):
            raise ValueError("allele arrays must have identical shape")
        if len(self.ids) != n or len(self.locus_names) != L:
            raise ValueError("ids / locus names inconsistent with array shape")
        if np.any(self.a > self.b):
            raise ValueError("genotypes must be stored canonically (a <= b)")

    @property
    def n_profiles(self) -> int:
        return self.a.shape[0]

    @property
    def n_loci(self) -> int:
        return self.a.shape[1]

    def genotype_labels(self, i: int, l: int) -> tuple[str, str]:
        labels = self.allele_labels[l]
        return labels[self.a[i, l]], labels[self.b[i, l]]


def pack_profiles(
    profiles: Sequence[Profile], freqs: FrequencySet
) -> PackedProfileSet:
    """Pack simulator profiles; dense ids are the panel allele indices."""
    n = len(profiles)
    if n < 1:
        raise ValueError("no profiles to pack")
    L = len(freqs)
    for locus in freqs:
        if locus.n_alleles > MAX_ALLELES:
            raise ValueError(
                f"locus {locus.name!r} has {locus.n_alleles} alleles; "
                f"scanner supports at most {MAX_ALLELES}"
            )
    a = np.empty((n, L), dtype=np.uint8)
    b = np.empty((n, L), dtype=np.uint8)
    for i, profile in enumerate(profiles):
        if len(profile.genotypes) != L:
            raise ValueError(f"profile {profile.id!r} does not cover the panel")
        for l, (x, y) in enumerate(profile.genotypes):
            a[i, l] = x
            b[i, l] = y
    return PackedProfileSet(
        ids=tuple(p.id for p in profiles),
        locus_names=freqs.locus_names,
        allele_labels=tuple(locus.alleles for locus in freqs),
        a=a,
        b=b,
    )


def load_profiles_csv(source: Union[str, os.PathLike, TextIO]) -> PackedProfileSet:
    """Read a profile CSV (header ``id,<locus>,...``; cells ``a/b``).

    Dense allele ids are assigned per locus in sorted label order.
    Profiles with missing or malformed genotype cells are rejected: the
    scanner requires fully typed profiles.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_profiles_csv(handle)

    rows: list[list[str]] = []
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append(stripped.split(","))
    if not rows:
        raise ValueError("empty profile file")
    header = rows[0]
    if len(header) < 2 or header[0].strip().lower() != "id":
        raise ValueError("profile CSV must start with 'id,<locus>,...'")
    locus_names = tuple(name.strip() for name in header[1:])
    L = len(locus_names)

    ids: list[str] = []
    label_pairs: list[list[tuple[str, str]]] = []
    label_sets: list[set[str]] = [set() for _ in range(L)]
    for row in rows[1:]:
        if len(row) != L + 1:
            raise ValueError(
                f"profile {row[0]!r}: expected {L} genotype cells, got {len(row) - 1}"
            )
        pairs = []
        for l, cell in enumerate(row[1:]):
            parts = cell.strip().split("/")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(
                    f"profile {row[0]!r}, locus {locus_names[l]!r}: "
                    f"bad genotype cell {cell!r}"
                )
            pairs.append((parts[0], parts[1]))
            label_sets[l].update(parts)
        ids.append(row[0])
        label_pairs.append(pairs)

    allele_labels = tuple(tuple(sorted(s)) for s in label_sets)
    for l, labels in enumerate(allele_labels):
        if len(labels) > MAX_ALLELES:
            raise ValueError(
                f"locus {locus_names[l]!r} has {len(labels)} alleles; "
                f"scanner supports at most {MAX_ALLELES}"
            )
    index = [{label: k for k, label in enumerate(labels)} for labels in allele_labels]
    n = len(ids)
    a = np.empty((n, L), dtype=np.uint8)
    b = np.empty((n, L), dtype=np.uint8)
    for i, pairs in enumerate(label_pairs):
        for l, (x, y) in enumerate(pairs):
            ia, ib = index[l][x], index[l][y]
            if ia > ib:
                ia, ib = ib, ia
            a[i, l] = ia
            b[i, l] = ib
    return PackedProfileSet(
        ids=tuple(ids),
        locus_names=locus_names,
        allele_labels=allele_labels,
        a=a,
        b=b,
    )


@dataclass(frozen=True, eq=False)
class MatchHistogram:
    """Counts of profile pairs by (matching loci, partially matching loci)."""

    counts: np.ndarray
    n_profiles: int
    locus_classes: np.ndarray | None = None  # optional (locus, class) pair counts

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("histogram must be square (L+1, L+1)")
        if np.any(counts < 0):
            raise ValueError("negative pair count")
        object.__setattr__(self, "counts", counts)

    @property
    def n_loci(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def total_pairs(self) -> int:
        return int(self.counts.sum())


@njit(parallel=True, cache=True)
def _scan_kernel(a, b, n_pad, n_real, n_blocks):  # pragma: no cover - compiled
    n, lanes = a.shape
    hists = np.zeros((n_blocks, n_real + 1, n_real + 1), np.int64)
    for k in prange(n_blocks):
        h = hists[k]
        for i in range(k, n, n_blocks):
            ai = a[i]
            bi = b[i]
            for j in range(i + 1, n):
                aj = a[j]
                bj = b[j]
                m = 0
                p = 0
                for l in range(lanes):
                    aa = ai[l] == aj[l]
                    bb = bi[l] == bj[l]
                    mm = aa & bb
                    sh = aa | bb | (ai[l] == bj[l]) | (bi[l] == aj[l])
                    m += mm
                    p += sh & (not mm)
                h[m - n_pad, p] += 1
    return hists.sum(axis=0)


@njit(parallel=True, cache=True)
def _locus_class_kernel(a, b, n_blocks):  # pragma: no cover - compiled
    n, L = a.shape
    counts = np.zeros((n_blocks, L, 3), np.int64)
    for k in prange(n_blocks):
        c = counts[k]
        for i in range(k, n, n_blocks):
            for j in range(i + 1, n):
                for l in range(L):
                    aa = a[i, l] == a[j, l]
                    bb = b[i, l] == b[j, l]
                    if aa and bb:
                        c[l, 2] += 1
                    elif aa or bb or (a[i, l] == b[j, l]) or (b[i, l] == a[j, l]):
                        c[l, 1] += 1
                    else:
                        c[l, 0] += 1
    return counts.sum(axis=0)


def _padded(packed: PackedProfileSet) -> tuple[np.ndarray, np.ndarray]:
    n, L = packed.a.shape
    a = np.full((n, _PAD_LANES), _PAD_VALUE, dtype=np.uint8)
    b = np.full((n, _PAD_LANES), _PAD_VALUE, dtype=np.uint8)
    a[:, :L] = packed.a
    b[:, :L] = packed.b
    return a, b


def scan_all_pairs(
    packed: PackedProfileSet,
    workers: int | None = None,
    locus_classes: bool = False,
) -> MatchHistogram:
    """Histogram all C(n, 2) profile pairs by match / partial counts.

    ``workers`` sets the number of row blocks; results are identical
    for every value because block histograms are exact integer counts
    summed in fixed order. ``locus_classes=True`` additionally counts
    pair classes per locus (a second pass, skip for very large scans).
    """
    n = packed.n_profiles
    L = packed.n_loci
    if n < 2:
        raise ValueError("need at least two profiles to scan")
    if L > _PAD_LANES:
        raise ValueError(f"scanner supports at most {_PAD_LANES} loci, got {L}")
    n_blocks = DEFAULT_BLOCKS if workers is None else int(workers)
    if n_blocks < 1:
        raise ValueError("workers must be >= 1")
    a, b = _padded(packed)
    counts = _scan_kernel(a, b, _PAD_LANES - L, L, n_blocks)
    per_locus = None
    if locus_classes:
        per_locus = _locus_class_kernel(packed.a, packed.b, n_blocks)
    hist = MatchHistogram(counts=counts, n_profiles=n, locus_classes=per_locus)
    if hist.total_pairs != math.comb(n, 2):
        raise RuntimeError("scan dropped pairs; histogram total is wrong")
    return hist


@dataclass(frozen=True)
class CellDeviation:
    matching: int
    partial: int
    observed: float
    expected: float
    deviation: float
    sd: float
    flagged: bool


@dataclass(frozen=True)
class CompareReport:
    """Per-cell observed vs expected deviations over the (m, p) domain."""

    cells: tuple[CellDeviation, ...]
    n_cells: int
    n_flagged: int
    n_nonzero_expected: int
    n_flagged_nonzero: int

    @property
    def flag_rate_nonzero(self) -> float:
        if self.n_nonzero_expected == 0:
            return 0.0
        return self.n_flagged_nonzero / self.n_nonzero_expected


def compare_observed_expected(
    observed: Union[MatchHistogram, np.ndarray], expected: np.ndarray
) -> CompareReport:
    """Compare an observed histogram with expected counts cell by cell.

    Each cell reports observed, expected, their difference and the
    Poisson standard deviation sqrt(expected); cells deviating by more
    than FLAG_SIGMAS standard deviations are flagged.
    """
    obs = observed.counts if isinstance(observed, MatchHistogram) else observed
    obs = np.asarray(obs, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise ValueError(f"shape mismatch: observed {obs.shape}, expected {exp.shape}")
    L = obs.shape[0] - 1
    cells = []
    n_flagged = 0
    n_nonzero = 0
    n_flagged_nonzero = 0
    for m in range(L + 1):
        for p in range(L + 1 - m):
            o = float(obs[m, p])
            e = float(exp[m, p])
            dev = o - e
            sd = math.sqrt(e)
            flagged = abs(dev) > FLAG_SIGMAS * sd
            if flagged:
                n_flagged += 1
            if e > 0.0:
                n_nonzero += 1
                if flagged:
                    n_flagged_nonzero += 1
            cells.append(
                CellDeviation(
                    matching=m,
                    partial=p,
                    observed=o,
                    expected=e,
                    deviation=dev,
                    sd=sd,
                    flagged=flagged,
                )
            )
    return CompareReport(
        cells=tuple(cells),
        n_cells=len(cells),
        n_flagged=n_flagged,
        n_nonzero_expected=n_nonzero,
        n_flagged_nonzero=n_flagged_nonzero,
    )


def write_histogram_tsv(stream: TextIO, hist: MatchHistogram) -> None:
    """Histogram as a TSV matrix: rows are matching-locus counts, columns
    are partial-match counts; cells outside m + p <= L stay blank."""
    L = hist.n_loci
    stream.write("matching\\partial\t" + "\t".join(str(p) for p in range(L + 1)) + "\n")
    for m in range(L + 1):
        cells = [str(m)]
        for p in range(L + 1 - m):
            cells.append(str(int(hist.counts[m, p])))
        stream.write("\t".join(cells) + "\n")


def read_histogram_tsv(source: Union[str, os.PathLike, TextIO]) -> MatchHistogram:
    """Parse a histogram written by write_histogram_tsv."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            return read_histogram_tsv(handle)
    lines = [
        line.rstrip("\n")
        for line in source
        if line.strip() and not line.startswith("#")
    ]
    if not lines:
        raise ValueError("empty histogram file")
    header = lines[0].split("\t")
    L = len(header) - 2
    if L < 0 or header[0] != "matching\\partial":
        raise ValueError("not a histogram TSV")
    counts = np.zeros((L + 1, L + 1), dtype=np.int64)
    for line in lines[1:]:
        fields = line.split("\t")
        m = int(fields[0])
        for p, cell in enumerate(fields[1:]):
            if cell:
                counts[m, p] = int(cell)
    total = int(counts.sum())
    # recover n from C(n, 2) = total
    n = int((1 + math.isqrt(1 + 8 * total)) // 2)
    if math.comb(n, 2) != total:
        n = 0  # unknown database size; total not triangular
    return MatchHistogram(counts=counts, n_profiles=n)
