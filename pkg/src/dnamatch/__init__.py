"""Match-probability calculus for forensic DNA profile databases.

Single-locus and multi-locus genotype match probabilities under a
Dirichlet coancestry model, kinship-adjusted variants, database-scale
collision statistics, a seedable profile-database simulator, and an
all-pairs profile scanner for checking predictions against data.
"""

__version__ = "0.1.0"

from .freqmodel import (
    FrequencySet,
    LocusModel,
    PowerSums,
    ThetaModel,
    expected_sample_genotype_freq,
    load_frequency_set,
    power_sums,
)
from .locusmatch import (
    AlleleCounts,
    MatchClassProbs,
    conditional_match_prob,
    dirichlet_draw_prob,
    genotype_pair_prob,
    likelihood_ratio,
    match_class_probs,
    single_genotype_prob,
)
from .kinship import (
    DeltaCoefficients,
    KinshipCoefficients,
    delta_match_probs,
    kin_match_probs,
    multi_locus_kin_match,
    named_relationship,
)
from .multilocus import (
    BirthdayResult,
    MatchCountDistribution,
    birthday_at_least_one,
    expected_pair_counts,
    expected_profile_pair_table,
    joint_match_distribution,
    locus_class_vector,
    sample_size_for_half,
)
from .rarity import (
    BaldingUniqueness,
    IslandScenario,
    balding_uniqueness,
    kingston_posterior,
)
from .simdb import (
    Profile,
    SimConfig,
    SimulatedDatabase,
    generate_database,
    sample_profile,
    sample_relative,
    sample_subpopulation_freqs,
)
from .matcher import (
    MatchClass,
    MatchHistogram,
    PackedProfileSet,
    classify_pair_locus,
    compare_observed_expected,
    load_profiles_csv,
    pack_profiles,
    scan_all_pairs,
)
