import math

import numpy as np
import pytest

from dnamatch.locusmatch import MatchClassProbs
from dnamatch.multilocus import (
    MatchCountDistribution,
    birthday_at_least_one,
    expected_pair_counts,
    expected_profile_pair_table,
    joint_match_distribution,
    locus_class_vector,
    sample_size_for_half,
)
from dnamatch.reference import brute_force_joint_distribution

HALF_LOCUS = MatchClassProbs(match=0.375, partial=0.5, mismatch=0.125)


def random_class_probs(rng) -> MatchClassProbs:
    m, p, x = rng.dirichlet([2.0, 2.0, 2.0])
    return MatchClassProbs(match=float(m), partial=float(p), mismatch=float(x))


def test_single_locus_identity():
    dist = joint_match_distribution([HALF_LOCUS])
    assert dist.q[1, 0] == 0.375
    assert dist.q[0, 1] == 0.5
    assert dist.q[0, 0] == 0.125


def test_two_locus_worked_example():
    dist = joint_match_distribution([HALF_LOCUS, HALF_LOCUS])
    expected = {
        (2, 0): 0.140625,
        (1, 1): 0.375,
        (0, 2): 0.25,
        (1, 0): 0.09375,
        (0, 1): 0.125,
        (0, 0): 0.015625,
    }
    for (m, p), value in expected.items():
        assert dist.q[m, p] == pytest.approx(value, abs=1e-15)
    assert dist.q.sum() == pytest.approx(1.0, abs=1e-15)


def test_joint_distribution_normalizes():
    rng = np.random.default_rng(211)
    for _ in range(10):
        L = int(rng.integers(1, 14))
        v = [random_class_probs(rng) for _ in range(L)]
        dist = joint_match_distribution(v)
        assert float(dist.q.sum()) == pytest.approx(1.0, abs=1e-12)
        # no mass outside the m + p <= L triangle
        for m in range(L + 1):
            for p in range(L + 1):
                if m + p > L:
                    assert dist.q[m, p] == 0.0


def test_joint_distribution_matches_brute_force():
    rng = np.random.default_rng(223)
    for L in range(1, 7):
        v = [random_class_probs(rng) for _ in range(L)]
        dist = joint_match_distribution(v)
        brute = brute_force_joint_distribution(v)
        assert np.all(np.abs(dist.q - brute) <= 1e-12)


def test_joint_distribution_all_match_corner():
    rng = np.random.default_rng(227)
    v = [random_class_probs(rng) for _ in range(8)]
    dist = joint_match_distribution(v)
    assert np.all(dist.q[8, 1:] == 0.0)
    product = 1.0
    for probs in v:
        product *= probs.match
    assert dist.q[8, 0] == product  # same multiplication order as the DP


def test_expected_pair_counts_scales_by_pairs():
    dist = joint_match_distribution([HALF_LOCUS, HALF_LOCUS])
    counts = expected_pair_counts(dist, 2)
    assert np.allclose(counts, dist.q)
    n = 65_493
    counts = expected_pair_counts(dist, n)
    total = float(counts.sum())
    pairs = math.comb(n, 2)
    assert abs(total - pairs) / pairs < 1e-6
    with pytest.raises(ValueError):
        expected_pair_counts(dist, 1)


def test_expected_profile_pair_table_layout():
    dist = joint_match_distribution([HALF_LOCUS] * 3)
    table = expected_profile_pair_table(94, dist)
    assert table.n_profiles == 94
    assert table.n_loci == 3
    assert np.array_equal(table.counts, expected_pair_counts(dist, 94))
    assert float(table.counts.sum()) == pytest.approx(math.comb(94, 2), rel=1e-9)
    assert np.array_equal(table.row(2), table.counts[2])


def test_birthday_worked_values():
    # frozen from a 50-digit evaluation of the product and the
    # exponential approximation
    result = birthday_at_least_one(1 / 7.54e8, 65_493)
    assert result.exact_valid
    assert result.exact == pytest.approx(0.94183225209, abs=1e-9)
    assert result.approx == pytest.approx(0.941829987781, abs=1e-9)

    result = birthday_at_least_one(2e-15, 65_493)
    assert result.approx == pytest.approx(4.28932384982e-6, rel=1e-9)


def test_birthday_two_profiles_is_p():
    result = birthday_at_least_one(0.125, 2)
    assert result.exact == pytest.approx(0.125, rel=1e-15)


def test_birthday_flags_invalid_exact_product():
    result = birthday_at_least_one(0.5, 4)
    assert not result.exact_valid
    assert result.exact is None
    assert 0.0 < result.approx <= 1.0
    assert "approximate" in result.caveat


def test_birthday_taylor_bounds():
    # The log(1-x) Taylor step is second order: against the product-of-
    # exponentials form exp(-n(n-1)P/2) the error is O(n^3 P^2). The
    # final exp(-n^2 P/2) form additionally replaces n(n-1) by n^2,
    # which costs a further nP/2. Both bounds hold for nP <= 1e-2.
    rng = np.random.default_rng(229)
    for _ in range(25):
        n = int(rng.integers(2, 2000))
        P = float(rng.uniform(1e-9, 1e-2 / n))
        assert n * P <= 1e-2
        result = birthday_at_least_one(P, n)
        intermediate = -math.expm1(-n * (n - 1) * P / 2.0)
        assert abs(result.exact - intermediate) <= 0.2 * n**3 * P * P
        assert abs(result.exact - result.approx) <= 0.5 * n * P + 0.2 * n**3 * P * P


def test_birthday_input_validation():
    with pytest.raises(ValueError):
        birthday_at_least_one(0.0, 10)
    with pytest.raises(ValueError):
        birthday_at_least_one(1.0, 10)
    with pytest.raises(ValueError):
        birthday_at_least_one(0.5, 1)


def test_sample_size_for_half_values():
    # sqrt(2 ln 2 / 1e-10) = 117741.002..., so the next integer is needed
    assert sample_size_for_half(1e-10) == 117_742
    assert sample_size_for_half(0.999) == 2


def test_sample_size_for_half_is_threshold():
    rng = np.random.default_rng(233)
    target = 2 * math.log(2)
    for _ in range(30):
        P = float(10 ** rng.uniform(-14, -1))
        n = sample_size_for_half(P)
        assert n * n * P >= target
        assert n == 2 or (n - 1) * (n - 1) * P < target


def test_locus_class_vector_order(panel13):
    v = locus_class_vector(panel13, 0.03)
    assert len(v) == len(panel13)
    for probs in v:
        assert probs.match + probs.partial + probs.mismatch == pytest.approx(
            1.0, abs=1e-12
        )


def test_match_count_distribution_validation():
    with pytest.raises(ValueError):
        MatchCountDistribution(q=np.zeros((3, 3)))
    bad = np.zeros((3, 3))
    bad[0, 0] = 1.5
    with pytest.raises(ValueError):
        MatchCountDistribution(q=bad)
