import io
import math

import numpy as np
import pytest

from dnamatch.matcher import (
    MatchClass,
    MatchHistogram,
    classify_pair_locus,
    compare_observed_expected,
    load_profiles_csv,
    pack_profiles,
    read_histogram_tsv,
    scan_all_pairs,
    write_histogram_tsv,
)
from dnamatch.reference import naive_scan
from dnamatch.simdb import SimConfig, generate_database, write_profiles_csv


@pytest.mark.parametrize(
    "g1, g2, expected",
    [
        ((0, 0), (0, 0), MatchClass.MATCH),
        ((0, 0), (0, 1), MatchClass.PARTIAL),
        ((0, 1), (0, 1), MatchClass.MATCH),
        ((0, 1), (0, 2), MatchClass.PARTIAL),
        ((0, 1), (2, 3), MatchClass.MISMATCH),
        ((0, 0), (1, 1), MatchClass.MISMATCH),
        ((0, 1), (1, 2), MatchClass.PARTIAL),
    ],
)
def test_classify_pair_locus(g1, g2, expected):
    assert classify_pair_locus(g1, g2) == expected
    assert classify_pair_locus(g2, g1) == expected  # symmetry


def test_classify_symmetry_random():
    rng = np.random.default_rng(401)
    for _ in range(200):
        g1 = tuple(sorted(rng.integers(0, 5, size=2).tolist()))
        g2 = tuple(sorted(rng.integers(0, 5, size=2).tolist()))
        assert classify_pair_locus(g1, g2) == classify_pair_locus(g2, g1)


def _simulated_packed(panel13, n, seed, theta=0.0, subpops=1):
    db = generate_database(
        SimConfig(seed=seed, n=n, theta=theta, subpopulations=subpops), panel13
    )
    return pack_profiles(db.profiles, panel13), db


def test_pack_round_trip(panel13):
    packed, db = _simulated_packed(panel13, 20, seed=51)
    for i, profile in enumerate(db.profiles):
        for l, (a, b) in enumerate(profile.genotypes):
            labels = packed.genotype_labels(i, l)
            locus = panel13.loci[l]
            assert labels == (locus.alleles[a], locus.alleles[b])
    # token equality (both ids equal) is exactly genotype identity
    i, j = 0, 1
    for l in range(packed.n_loci):
        same_token = (
            packed.a[i, l] == packed.a[j, l] and packed.b[i, l] == packed.b[j, l]
        )
        assert same_token == (db.profiles[i].genotypes[l] == db.profiles[j].genotypes[l])


def test_load_profiles_csv_round_trip(panel13, tmp_path):
    _, db = _simulated_packed(panel13, 15, seed=52)
    path = tmp_path / "profiles.csv"
    with open(path, "w") as handle:
        write_profiles_csv(handle, db, panel13)
    packed = load_profiles_csv(path)
    assert packed.n_profiles == 15
    assert packed.n_loci == 13
    assert packed.locus_names == panel13.locus_names
    for i, profile in enumerate(db.profiles):
        for l, (a, b) in enumerate(profile.genotypes):
            locus = panel13.loci[l]
            want = tuple(sorted((locus.alleles[a], locus.alleles[b])))
            assert tuple(sorted(packed.genotype_labels(i, l))) == want


def test_load_profiles_rejects_missing_genotypes():
    text = "id,L1,L2\np1,1/2,3/3\np2,1/2\n"
    with pytest.raises(ValueError, match="expected 2 genotype cells"):
        load_profiles_csv(io.StringIO(text))
    text = "id,L1\np1,1/\n"
    with pytest.raises(ValueError, match="bad genotype cell"):
        load_profiles_csv(io.StringIO(text))
    text = "id,L1\np1,12\n"
    with pytest.raises(ValueError, match="bad genotype cell"):
        load_profiles_csv(io.StringIO(text))
    with pytest.raises(ValueError, match="id,"):
        load_profiles_csv(io.StringIO("name,L1\np1,1/2\n"))
    with pytest.raises(ValueError, match="empty"):
        load_profiles_csv(io.StringIO("# only comments\n"))


def test_scan_two_identical_profiles():
    text = "id,{}\n".format(",".join(f"L{k}" for k in range(13)))
    row = ",".join("7/9" for _ in range(13))
    text += f"p1,{row}\np2,{row}\n"
    packed = load_profiles_csv(io.StringIO(text))
    hist = scan_all_pairs(packed)
    assert hist.counts[13, 0] == 1
    assert hist.total_pairs == 1
    assert hist.counts.sum() == 1


def test_scan_three_profile_hand_case():
    # p1 vs p2: L1 match, L2 partial  -> (1, 1)
    # p1 vs p3: L1 partial, L2 mismatch -> (0, 1)
    # p2 vs p3: L1 partial, L2 mismatch -> (0, 1)
    text = (
        "id,L1,L2\n"
        "p1,1/2,3/4\n"
        "p2,1/2,4/5\n"
        "p3,2/6,7/8\n"
    )
    packed = load_profiles_csv(io.StringIO(text))
    hist = scan_all_pairs(packed)
    expected = np.zeros((3, 3), dtype=np.int64)
    expected[1, 1] = 1
    expected[0, 1] = 2
    assert np.array_equal(hist.counts, expected)
    ref_hist, ref_locus = naive_scan(packed.a, packed.b)
    assert np.array_equal(hist.counts, ref_hist)


def test_scan_equals_naive_reference(panel13):
    rng = np.random.default_rng(61)
    for n in (2, 3, 17, 120):
        packed, _ = _simulated_packed(panel13, n, seed=int(rng.integers(1 << 30)))
        hist = scan_all_pairs(packed, locus_classes=True)
        ref_hist, ref_locus = naive_scan(packed.a, packed.b)
        assert np.array_equal(hist.counts, ref_hist)
        assert np.array_equal(hist.locus_classes, ref_locus)
        assert hist.total_pairs == math.comb(n, 2)


def test_scan_worker_count_invariance(panel13):
    packed, _ = _simulated_packed(panel13, 300, seed=62)
    results = [scan_all_pairs(packed, workers=w).counts for w in (1, 4, 8)]
    assert np.array_equal(results[0], results[1])
    assert np.array_equal(results[0], results[2])


def test_scan_profile_order_invariance(panel13):
    packed, db = _simulated_packed(panel13, 100, seed=63)
    hist = scan_all_pairs(packed)
    rng = np.random.default_rng(0)
    perm = rng.permutation(len(db.profiles))
    shuffled = pack_profiles([db.profiles[i] for i in perm], panel13)
    assert np.array_equal(scan_all_pairs(shuffled).counts, hist.counts)


def test_scan_rejects_tiny_input(panel13):
    packed, _ = _simulated_packed(panel13, 2, seed=64)
    with pytest.raises(ValueError):
        scan_all_pairs(packed, workers=0)
    single = pack_profiles(
        [generate_database(SimConfig(seed=1, n=2, theta=0.0), panel13).profiles[0]],
        panel13,
    )
    with pytest.raises(ValueError, match="two profiles"):
        scan_all_pairs(single)


def test_compare_equal_inputs_has_no_flags():
    counts = np.zeros((3, 3))
    counts[0, 0] = 5
    counts[1, 1] = 7
    report = compare_observed_expected(counts, counts.copy())
    assert report.n_flagged == 0
    for cell in report.cells:
        assert cell.deviation == 0.0


def test_compare_flags_one_inflated_cell():
    expected = np.zeros((4, 4))
    for m in range(4):
        for p in range(4 - m):
            expected[m, p] = 50.0
    observed = expected.copy()
    observed[1, 2] += 10.0 * math.sqrt(50.0)
    report = compare_observed_expected(observed, expected)
    assert report.n_flagged == 1
    flagged = [c for c in report.cells if c.flagged]
    assert (flagged[0].matching, flagged[0].partial) == (1, 2)
    assert flagged[0].sd == pytest.approx(math.sqrt(50.0))


def test_compare_reproduces_published_style_differences():
    # a no-match row: observed 0, 3, 18, 92 versus expectation 0, 2, 19, 90
    observed = np.zeros((4, 4))
    expected = np.zeros((4, 4))
    observed[0, :4] = [0, 3, 18, 92]
    expected[0, :4] = [0, 2, 19, 90]
    report = compare_observed_expected(observed, expected)
    row = {(c.matching, c.partial): c for c in report.cells}
    assert row[(0, 1)].deviation == pytest.approx(1.0)
    assert row[(0, 2)].deviation == pytest.approx(-1.0)
    assert row[(0, 3)].deviation == pytest.approx(2.0)
    assert report.n_flagged == 0


def test_compare_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        compare_observed_expected(np.zeros((3, 3)), np.zeros((4, 4)))


def test_histogram_tsv_round_trip(panel13):
    packed, _ = _simulated_packed(panel13, 40, seed=65)
    hist = scan_all_pairs(packed)
    stream = io.StringIO()
    write_histogram_tsv(stream, hist)
    parsed = read_histogram_tsv(io.StringIO(stream.getvalue()))
    assert np.array_equal(parsed.counts, hist.counts)
    assert parsed.n_profiles == 40
    with pytest.raises(ValueError, match="histogram"):
        read_histogram_tsv(io.StringIO("junk\n1\t2\n"))


def test_match_histogram_validation():
    with pytest.raises(ValueError, match="square"):
        MatchHistogram(counts=np.zeros((2, 3), dtype=np.int64), n_profiles=2)
    with pytest.raises(ValueError, match="negative"):
        MatchHistogram(counts=np.full((2, 2), -1, dtype=np.int64), n_profiles=2)
