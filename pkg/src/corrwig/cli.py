"""Command-line interface.

Subcommands: spectrum, moments, combinatorics, covariance, verify.
Exit codes: 0 success (all verdicts pass), 1 verdict failure, 2 usage or
configuration error, 3 numerical error.  All outputs are written
atomically and depend only on the arguments, never on wall clock or
thread count.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ensemble import EnsembleConfig, sample_matrix
from .errors import ConfigurationError, NumericalError
from .experiments import PRESET_NAMES, preset_plan, run_experiment
from .output import (
    write_counts_csv,
    write_csv,
    write_histogram_csv,
    write_json,
    write_moments_csv,
    write_spectrum_csv,
    histogram_rows,
    moment_rows,
)
from .partitions import (
    enumerate_pair_partitions,
    enumerate_partitions,
    PARTITION_GUARD,
)
from .processes import (
    GaussAR1,
    ConstantDiagonal,
    FiniteMarkov,
    IID,
    MarkovChainSpec,
    covariance_model,
    process_from_dict,
    process_to_dict,
)
from .spectral import (
    empirical_distribution,
    eigenvalues,
    kolmogorov_distance,
    moment_report,
    trace_moment,
)
from .streams import DEFAULT_SEED
from .tuples import pattern_tuple_counts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrwig",
        description=(
            "Symmetric random matrices with correlated diagonals: spectra, "
            "semicircle comparisons, exact counting, and verification runs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default {DEFAULT_SEED})")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default ./out)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="emit tables as CSV files plus a summary JSON, or "
                            "embed everything in the summary JSON")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; must not change any output")

    def add_ensemble(p):
        p.add_argument("--n", type=int, default=None, help="matrix dimension")
        p.add_argument("--process", choices=("iid", "ar1", "markov", "toeplitz"),
                       default=None, help="diagonal process (default iid)")
        p.add_argument("--rho", type=float, default=None,
                       help="AR(1) coefficient, |rho| < 1")
        p.add_argument("--chain", type=Path, default=None,
                       help="JSON file with Markov 'states' and 'transition'")
        p.add_argument("--config", type=Path, default=None,
                       help="JSON ensemble config; explicit flags override it")

    p = sub.add_parser("spectrum", help="eigenvalues, histogram, and semicircle distance")
    add_ensemble(p)
    p.add_argument("--bins", default="auto",
                   help="histogram bin count (default: automatic width)")
    add_common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("moments", help="empirical trace moments vs the limit moments")
    add_ensemble(p)
    p.add_argument("--max-k", type=int, default=10, help="largest moment order")
    add_common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("combinatorics", help="exact pattern counts for one tuple order")
    p.add_argument("--k", type=int, required=True, help="tuple order (even)")
    p.add_argument("--n-ladder", default="5,10,20,40",
                   help="comma-separated strictly increasing sizes")
    add_common(p)
    p.set_defaults(func=cmd_combinatorics)

    p = sub.add_parser("covariance", help="exact autocovariance sequence of a process")
    add_ensemble(p)
    p.add_argument("--max-tau", type=int, default=20, help="largest lag")
    add_common(p)
    p.set_defaults(func=cmd_covariance)

    p = sub.add_parser("verify", help="run a named verification preset")
    p.add_argument("--preset", required=True,
                   help=f"one of {', '.join(PRESET_NAMES)}")
    add_common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def _load_json(path: Path) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read JSON file {path}: {exc}") from exc


def _resolve_process(args, file_config: dict):
    if args.process is not None:
        if args.process == "iid":
            return IID()
        if args.process == "ar1":
            if args.rho is None:
                raise ConfigurationError("--process ar1 requires --rho")
            return GaussAR1(args.rho)
        if args.process == "markov":
            if args.chain is None:
                raise ConfigurationError("--process markov requires --chain FILE")
            return FiniteMarkov(MarkovChainSpec.from_dict(_load_json(args.chain)))
        if args.process == "toeplitz":
            return ConstantDiagonal()
    if "process" in file_config:
        return process_from_dict(file_config["process"])
    return IID()


def _resolve_ensemble(args) -> EnsembleConfig:
    file_config = _load_json(args.config) if args.config else {}
    n = args.n if args.n is not None else file_config.get("n")
    if n is None:
        raise ConfigurationError("matrix dimension required (--n or config file)")
    seed = args.seed if args.seed is not None else file_config.get("seed", DEFAULT_SEED)
    return EnsembleConfig(n=int(n), process=_resolve_process(args, file_config), seed=int(seed))


def _check_threads(args) -> None:
    if args.threads < 1:
        raise ConfigurationError(f"--threads must be >= 1, got {args.threads}")


def cmd_spectrum(args) -> int:
    _check_threads(args)
    config = _resolve_ensemble(args)
    if args.bins == "auto":
        bins = "auto"
    else:
        try:
            bins = int(args.bins)
        except ValueError as exc:
            raise ConfigurationError(f"bad --bins value {args.bins!r}") from exc
    matrix = sample_matrix(config)
    spectrum = eigenvalues(matrix)
    dist = empirical_distribution(spectrum, bins=bins)
    summary = {
        "config": config.to_dict(),
        "kolmogorov_distance": kolmogorov_distance(dist),
        "trace": matrix.trace(),
        "frobenius_sq": matrix.frobenius_sq(),
    }
    out = args.out
    if args.format == "csv":
        write_spectrum_csv(out / "spectrum.csv", spectrum)
        write_histogram_csv(out / "histogram.csv", dist)
    else:
        summary["eigenvalues"] = [float(x) for x in spectrum.eigenvalues]
        summary["histogram"] = [list(r) for r in histogram_rows(dist)]
    write_json(out / "summary.json", summary)
    return 0


def cmd_moments(args) -> int:
    _check_threads(args)
    config = _resolve_ensemble(args)
    if args.max_k < 1:
        raise ConfigurationError(f"--max-k must be >= 1, got {args.max_k}")
    spectrum = eigenvalues(sample_matrix(config))
    report = moment_report(spectrum, args.max_k)
    summary = {
        "config": config.to_dict(),
        "max_k": args.max_k,
        "second_moment": trace_moment(spectrum, 2),
    }
    if args.format == "csv":
        write_moments_csv(args.out / "moments.csv", report)
    else:
        summary["moments"] = [list(r) for r in moment_rows(report)]
    write_json(args.out / "summary.json", summary)
    return 0


def cmd_combinatorics(args) -> int:
    _check_threads(args)
    k = args.k
    if k < 2 or k % 2 == 1:
        raise ConfigurationError(f"pair-pattern counting requires even k >= 2, got {k}")
    try:
        ladder = tuple(int(x) for x in str(args.n_ladder).split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad --n-ladder value {args.n_ladder!r}") from exc
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError(f"--n-ladder must be strictly increasing, got {ladder}")
    rows = []
    noncrossing = 0
    pair_count = 0
    for pattern in enumerate_pair_partitions(k):
        pair_count += 1
        if not pattern.crossing:
            noncrossing += 1
        name = pattern.canonical_string()
        for n in ladder:
            matching, reflected = pattern_tuple_counts(pattern, n)
            rows.append((k, n, name, matching, reflected,
                         reflected / float(n) ** (k / 2.0 + 1.0)))
    summary = {
        "k": k,
        "ladder": list(ladder),
        "pair_partition_count": pair_count,
        "noncrossing_count": noncrossing,
    }
    if k <= PARTITION_GUARD:
        summary["partition_count"] = sum(1 for _ in enumerate_partitions(k))
    if args.format == "csv":
        write_counts_csv(args.out / "counts.csv", rows)
    else:
        summary["counts"] = [list(r) for r in rows]
    write_json(args.out / "summary.json", summary)
    return 0


def cmd_covariance(args) -> int:
    _check_threads(args)
    if args.max_tau < 0:
        raise ConfigurationError(f"--max-tau must be >= 0, got {args.max_tau}")
    file_config = _load_json(args.config) if args.config else {}
    process = _resolve_process(args, file_config)
    model = covariance_model(process)
    rows = [(tau, model.cov(tau)) for tau in range(args.max_tau + 1)]
    summary = {
        "process": process_to_dict(process),
        "summable": model.summable,
        "abs_sum": model.abs_sum,
    }
    if args.format == "csv":
        write_csv(args.out / "covariance.csv", ("tau", "cov"), rows)
    else:
        summary["covariance"] = [list(r) for r in rows]
    write_json(args.out / "summary.json", summary)
    return 0


def cmd_verify(args) -> int:
    _check_threads(args)
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    plan = preset_plan(args.preset, seed=seed, out_dir=str(args.out))
    result = run_experiment(plan)
    write_json(args.out / "result.json", result.to_dict())
    for name in sorted(result.verdicts):
        status = "PASS" if result.verdicts[name] else "FAIL"
        print(f"{status} {name}")
    return 0 if result.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # never leak a traceback to the shell
        print(f"unexpected error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
