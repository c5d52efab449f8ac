"""Command-line front end.

Every computation in the library is reachable as a subcommand with
scriptable TSV or JSON-lines output. Output starts with a metadata
block (tool version, input digests, seed, theta, timestamp); apart
from the timestamp, identical inputs give byte-identical output.

Exit codes: 0 success, 2 input validation failure, 3 internal error.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from fractions import Fraction
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from .freqmodel import load_frequency_set
from .kinship import (
    DeltaCoefficients,
    delta_match_probs,
    kin_match_probs,
    named_relationship,
)
from .locusmatch import match_class_probs
from .matcher import (
    compare_observed_expected,
    load_profiles_csv,
    read_histogram_tsv,
    scan_all_pairs,
    write_histogram_tsv,
)
from .multilocus import (
    BIRTHDAY_CAVEAT,
    birthday_at_least_one,
    expected_pair_counts,
    joint_match_distribution,
    locus_class_vector,
    sample_size_for_half,
)
from .rarity import IslandScenario, balding_uniqueness, kingston_posterior
from .simdb import (
    SimConfig,
    generate_database,
    write_manifest_csv,
    write_profiles_csv,
)

FORMATS = ("tsv", "json-lines")


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class Envelope:
    """Formats one command's output: metadata block, then rows."""

    def __init__(self, stream: TextIO, fmt: str, metadata: dict):
        self.stream = stream
        self.fmt = fmt
        self.metadata = {
            "tool_version": __version__,
            **metadata,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        if fmt == "tsv":
            for key, value in self.metadata.items():
                stream.write(f"# {key}\t{value}\n")
        else:
            stream.write(json.dumps({"metadata": self.metadata}) + "\n")

    def table(self, header: Sequence[str], rows: Iterable[Sequence]) -> None:
        if self.fmt == "tsv":
            self.stream.write("\t".join(header) + "\n")
            for row in rows:
                self.stream.write("\t".join(_fmt(v) for v in row) + "\n")
        else:
            for row in rows:
                self.stream.write(json.dumps(dict(zip(header, row))) + "\n")

    def note(self, key: str, value) -> None:
        if self.fmt == "tsv":
            self.stream.write(f"# {key}\t{value}\n")
        else:
            self.stream.write(json.dumps({key: value}) + "\n")


def _parse_theta_list(text: str) -> list[float]:
    values = []
    for field in text.split(","):
        values.append(float(field))
    return values


def _parse_deltas(text: str) -> DeltaCoefficients:
    parts = text.split(",")
    if len(parts) != 9:
        raise ValueError("expected nine comma-separated identity probabilities")
    return DeltaCoefficients(*(Fraction(p) for p in parts))


def cmd_match_prob(args) -> int:
    freqs = load_frequency_set(args.freq_file)
    thetas = _parse_theta_list(args.theta)
    metadata = {
        "command": "match-prob",
        "freq_file_sha256": _digest(args.freq_file),
        "theta": args.theta,
    }
    if args.relationship:
        metadata["relationship"] = args.relationship
        k = named_relationship(args.relationship)
        per_locus = lambda locus, t: kin_match_probs(locus, t, k).match
    elif args.delta:
        metadata["delta"] = args.delta
        d = _parse_deltas(args.delta)
        per_locus = lambda locus, t: delta_match_probs(locus, t, d).match
    else:
        per_locus = lambda locus, t: match_class_probs(locus, t).match

    env = Envelope(sys.stdout, args.format, metadata)
    header = ["locus"] + [f"theta={t:g}" for t in thetas]
    rows = []
    products = [1.0] * len(thetas)
    for locus in freqs:
        values = [per_locus(locus, t) for t in thetas]
        for i, v in enumerate(values):
            products[i] *= v
        rows.append([locus.name] + values)
    rows.append(["ALL"] + products)
    env.table(header, rows)
    return 0


def cmd_expect_pairs(args) -> int:
    freqs = load_frequency_set(args.freq_file)
    theta = float(args.theta)
    dist = joint_match_distribution(locus_class_vector(freqs, theta))
    counts = expected_pair_counts(dist, args.n)
    L = dist.n_loci
    env = Envelope(
        sys.stdout,
        args.format,
        {
            "command": "expect-pairs",
            "freq_file_sha256": _digest(args.freq_file),
            "theta": repr(theta),
            "n": args.n,
            "min_matching": args.min_matching,
        },
    )
    if args.layout == "matrix":
        header = ["matching\\partial"] + [str(p) for p in range(L + 1)]
        rows = []
        for m in range(args.min_matching, L + 1):
            rows.append([m] + [counts[m, p] for p in range(L + 1 - m)])
        env.table(header, rows)
    else:
        rows = []
        for m in range(args.min_matching, L + 1):
            for p in range(L + 1 - m):
                rows.append([m, p, counts[m, p]])
        env.table(["m", "p", "expected_count"], rows)
    return 0


def cmd_birthday(args) -> int:
    result = birthday_at_least_one(args.p, args.n)
    env = Envelope(
        sys.stdout,
        args.format,
        {"command": "birthday", "p": repr(args.p), "n": args.n},
    )
    rows = [
        ["approx", result.approx],
        ["exact", result.exact if result.exact is not None else "n/a"],
        ["exact_valid", result.exact_valid],
        ["half_match_sample_size", sample_size_for_half(args.p)],
    ]
    env.table(["quantity", "value"], rows)
    env.note("caveat", BIRTHDAY_CAVEAT)
    return 0


def cmd_island(args) -> int:
    env_meta = {"command": "island", "estimator": args.estimator}
    if args.estimator == "kingston":
        if args.poisson_mean is not None:
            lam = args.poisson_mean
        elif args.p is not None and args.N is not None:
            lam = IslandScenario(int(args.N), args.p).poisson_mean
        else:
            raise ValueError("kingston needs --lambda, or --p and --N")
        env_meta["lambda"] = repr(lam)
        env = Envelope(sys.stdout, args.format, env_meta)
        env.table(
            ["quantity", "value"], [["posterior_correct_identification", kingston_posterior(lam)]]
        )
    else:
        if args.p is None or args.N is None:
            raise ValueError("balding needs --p and --N")
        scenario = IslandScenario(int(args.N), args.p)
        result = balding_uniqueness(scenario)
        env_meta["p"] = repr(args.p)
        env_meta["N"] = int(args.N)
        env = Envelope(sys.stdout, args.format, env_meta)
        env.table(
            ["quantity", "value"],
            [
                ["uniqueness_probability", result.probability],
                ["lower_bound", result.lower_bound],
            ],
        )
    return 0


def _parse_plant(values: list[str]) -> tuple[tuple[str, int], ...]:
    planted = []
    for item in values:
        if "=" not in item:
            raise ValueError(f"--plant wants RELATIONSHIP=COUNT, got {item!r}")
        rel, _, count = item.partition("=")
        planted.append((rel, int(count)))
    return tuple(planted)


def cmd_simulate(args) -> int:
    freqs = load_frequency_set(args.freq_file)
    config = SimConfig(
        seed=args.seed,
        n=args.n,
        theta=args.theta,
        subpopulations=args.subpopulations,
        planted_relatives=_parse_plant(args.plant),
    )
    db = generate_database(config, freqs)
    with open(args.out_profiles, "w", encoding="utf-8", newline="") as handle:
        write_profiles_csv(handle, db, freqs)
    if args.out_manifest:
        with open(args.out_manifest, "w", encoding="utf-8", newline="") as handle:
            write_manifest_csv(handle, db)
    env = Envelope(
        sys.stdout,
        args.format,
        {
            "command": "simulate",
            "freq_file_sha256": _digest(args.freq_file),
            "seed": config.seed,
            "theta": repr(config.theta),
            "rng": db.rng_algorithm,
        },
    )
    env.table(
        ["quantity", "value"],
        [
            ["profiles_written", len(db.profiles)],
            ["planted_pairs", len(db.planted_pairs)],
            ["subpopulations", config.subpopulations],
            ["profiles_file", args.out_profiles],
            ["manifest_file", args.out_manifest or "n/a"],
        ],
    )
    return 0


def cmd_scan(args) -> int:
    packed = load_profiles_csv(args.profiles)
    hist = scan_all_pairs(packed, workers=args.workers)
    metadata = {
        "command": "scan",
        "profiles_sha256": _digest(args.profiles),
        "n_profiles": packed.n_profiles,
        "n_loci": packed.n_loci,
        "total_pairs": hist.total_pairs,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            write_histogram_tsv(handle, hist)
        env = Envelope(sys.stdout, args.format, metadata)
        env.table(["quantity", "value"], [["histogram_file", args.out]])
    else:
        env = Envelope(sys.stdout, args.format, metadata)
        if args.format == "tsv":
            write_histogram_tsv(sys.stdout, hist)
        else:
            L = hist.n_loci
            rows = []
            for m in range(L + 1):
                for p in range(L + 1 - m):
                    rows.append([m, p, int(hist.counts[m, p])])
            env.table(["m", "p", "count"], rows)
    return 0


def cmd_compare(args) -> int:
    hist = read_histogram_tsv(args.histogram)
    freqs = load_frequency_set(args.freq_file)
    theta = float(args.theta)
    n = args.n if args.n else hist.n_profiles
    if n < 2:
        raise ValueError(
            "could not derive the database size from the histogram total; pass --n"
        )
    if len(freqs) != hist.n_loci:
        raise ValueError(
            f"panel has {len(freqs)} loci but histogram covers {hist.n_loci}"
        )
    dist = joint_match_distribution(locus_class_vector(freqs, theta))
    expected = expected_pair_counts(dist, n)
    report = compare_observed_expected(hist, expected)
    env = Envelope(
        sys.stdout,
        args.format,
        {
            "command": "compare",
            "histogram_sha256": _digest(args.histogram),
            "freq_file_sha256": _digest(args.freq_file),
            "theta": repr(theta),
            "n": n,
        },
    )
    rows = [
        [c.matching, c.partial, c.observed, c.expected, c.deviation, c.sd, int(c.flagged)]
        for c in report.cells
    ]
    env.table(["m", "p", "observed", "expected", "deviation", "sd", "flagged"], rows)
    env.note("cells", report.n_cells)
    env.note("flagged", report.n_flagged)
    env.note("nonzero_expected_cells", report.n_nonzero_expected)
    env.note("flagged_nonzero", report.n_flagged_nonzero)
    return 0


def cmd_freq_validate(args) -> int:
    freqs = load_frequency_set(args.freq_file)
    env = Envelope(
        sys.stdout,
        args.format,
        {"command": "freq validate", "freq_file_sha256": _digest(args.freq_file)},
    )
    rows = []
    for locus in freqs:
        rows.append(
            [
                locus.name,
                locus.n_alleles,
                float(locus.freqs.min()),
                float(locus.freqs.max()),
                float(locus.freqs.sum()),
            ]
        )
    env.table(["locus", "n_alleles", "min_freq", "max_freq", "sum"], rows)
    return 0


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=FORMATS, default="tsv", help="output format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnamatch",
        description="DNA profile match probabilities, database collision "
        "statistics, simulation and all-pairs scanning.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("match-prob", help="per-locus and product match probabilities")
    p.add_argument("--freq-file", required=True)
    p.add_argument("--theta", default="0", help="comma-separated theta values")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--relationship", help="named relationship, e.g. full-sibs")
    group.add_argument("--delta", help="nine comma-separated identity probabilities")
    _add_format(p)
    p.set_defaults(func=cmd_match_prob)

    p = sub.add_parser("expect-pairs", help="expected matching-pair counts")
    p.add_argument("--freq-file", required=True)
    p.add_argument("--theta", default="0")
    p.add_argument("--n", type=int, required=True, help="database size")
    p.add_argument("--min-matching", type=int, default=0)
    p.add_argument("--layout", choices=("triples", "matrix"), default="triples")
    _add_format(p)
    p.set_defaults(func=cmd_expect_pairs)

    p = sub.add_parser("birthday", help="probability of at least one matching pair")
    p.add_argument("--p", type=float, required=True, help="profile probability")
    p.add_argument("--n", type=int, required=True, help="number of profiles")
    _add_format(p)
    p.set_defaults(func=cmd_birthday)

    p = sub.add_parser("island", help="island-problem posteriors")
    p.add_argument("--estimator", choices=("balding", "kingston"), required=True)
    p.add_argument("--p", type=float, help="profile probability")
    p.add_argument("--N", type=float, help="population size (excluding the suspect)")
    p.add_argument("--lambda", dest="poisson_mean", type=float, help="Poisson mean")
    _add_format(p)
    p.set_defaults(func=cmd_island)

    p = sub.add_parser("simulate", help="generate a synthetic profile database")
    p.add_argument("--freq-file", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--subpopulations", type=int, default=1)
    p.add_argument(
        "--plant",
        action="append",
        default=[],
        metavar="RELATIONSHIP=COUNT",
        help="plant relative pairs, e.g. --plant full-sibs=5",
    )
    p.add_argument("--out-profiles", required=True)
    p.add_argument("--out-manifest")
    _add_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="all-pairs match histogram of a profile CSV")
    p.add_argument("--profiles", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="write histogram TSV here instead of stdout")
    _add_format(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("compare", help="observed histogram vs expectation")
    p.add_argument("--histogram", required=True)
    p.add_argument("--freq-file", required=True)
    p.add_argument("--theta", default="0")
    p.add_argument("--n", type=int, help="database size (default: derived)")
    _add_format(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("freq", help="frequency file utilities")
    freq_sub = p.add_subparsers(dest="freq_command", required=True)
    v = freq_sub.add_parser("validate", help="load and summarize a frequency file")
    v.add_argument("--freq-file", required=True)
    _add_format(v)
    v.set_defaults(func=cmd_freq_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal invariant violations
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
