from pathlib import Path

import numpy as np
import pytest

from dnamatch.freqmodel import FrequencySet, LocusModel, load_frequency_set

DATA_DIR = Path(__file__).parent / "data"

# Optional external panel for the published-table reproduction checks.
# The source tables are cited, not reprinted, so this file ships only if
# someone obtains it independently (CSV: locus,allele,frequency).
EXTERNAL_PANEL = DATA_DIR / "budowle_moretti_caucasian.csv"


@pytest.fixture(scope="session")
def panel13() -> FrequencySet:
    return load_frequency_set(DATA_DIR / "panel13.csv")


@pytest.fixture()
def two_allele_locus() -> LocusModel:
    return LocusModel(name="L1", alleles=("A", "B"), freqs=np.array([0.5, 0.5]))


@pytest.fixture()
def three_allele_locus() -> LocusModel:
    return LocusModel(
        name="L3", alleles=("A", "B", "C"), freqs=np.array([0.2, 0.3, 0.5])
    )


@pytest.fixture()
def skewed_locus() -> LocusModel:
    return LocusModel(
        name="L4", alleles=("A", "B", "C", "D"), freqs=np.array([0.4, 0.3, 0.2, 0.1])
    )
