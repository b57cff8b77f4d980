"""Command-line outage sweep runner.

Runs the Monte Carlo engine over a grid of transmit powers and writes one
CSV row per (scheme, partition, SNR point).  Output is byte-deterministic
for a given argument vector: rows are fully sorted, floats are printed
with fixed precision, and the seed is echoed in a trailing comment line.

Exit codes distinguish failure causes so scripts can react:

====  =====================================================
code  meaning
====  =====================================================
0     success
2     malformed command line (argparse)
3     unparsable partition list
4     partitions with mismatched antenna totals
5     invalid SNR grid
6     invalid option value (rate, trials, schemes, workers)
7     runtime failure (e.g. output not writable)
====  =====================================================
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .analysis import genie_outage_bounds, selection_outage_bounds
from .channel import Partition
from .combining import Scheme
from .montecarlo import SimConfig, estimate_outage

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_PARTITION = 3
EXIT_PARTITION_MISMATCH = 4
EXIT_BAD_SNR_GRID = 5
EXIT_BAD_OPTION = 6
EXIT_RUNTIME = 7

CSV_HEADER = (
    "scheme,partition,snr_db,rate,trials,outages,p_out,"
    "ci_low,ci_high,bound_lower,bound_upper"
)


class CliError(Exception):
    """Validation failure with a dedicated exit code."""

    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class SweepSpec:
    """Validated command-line arguments for one sweep."""

    partitions: tuple[Partition, ...]
    snr_db: tuple[float, ...]
    rate: float
    trials: int
    seed: int
    schemes: tuple[Scheme, ...]
    bounds: bool
    out: str
    workers: int


def parse_partition_list(text: str) -> tuple[Partition, ...]:
    """Parse a semicolon-separated partition list like ``"4;2,2;1,1,1,1"``."""
    items = [item.strip() for item in text.split(";")]
    if not any(items):
        raise CliError(EXIT_BAD_PARTITION, "--partitions: empty partition list")
    partitions = []
    for item in items:
        if not item:
            raise CliError(EXIT_BAD_PARTITION, "--partitions: empty partition entry")
        try:
            partitions.append(Partition.from_string(item))
        except ValueError as exc:
            raise CliError(EXIT_BAD_PARTITION, f"--partitions: {exc}") from None
    totals = {p.n for p in partitions}
    if len(totals) != 1:
        raise CliError(
            EXIT_PARTITION_MISMATCH,
            "--partitions: all partitions must cover the same antenna total "
            f"(got totals {sorted(totals)})",
        )
    return tuple(partitions)


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Parse an SNR grid: ``start:stop:step`` in dB, or a single value."""
    try:
        if ":" in text:
            pieces = text.split(":")
            if len(pieces) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = (float(p) for p in pieces)
            if step <= 0:
                raise ValueError("step must be positive")
            if stop < start:
                raise ValueError("stop must not precede start")
            count = int((stop - start) / step + 1e-9) + 1
            return tuple(start + i * step for i in range(count))
        return (float(text),)
    except ValueError as exc:
        raise CliError(EXIT_BAD_SNR_GRID, f"--snr-db: {exc}") from None


def parse_scheme_list(text: str) -> tuple[Scheme, ...]:
    """Parse a comma-separated scheme list like ``"genie-tb,sel-tb"``."""
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise CliError(EXIT_BAD_OPTION, "--schemes: empty scheme list")
    valid = ", ".join(s.value for s in Scheme)
    schemes = []
    for name in names:
        try:
            scheme = Scheme(name)
        except ValueError:
            raise CliError(
                EXIT_BAD_OPTION,
                f"--schemes: unknown scheme {name!r} (choose from {valid})",
            ) from None
        if scheme not in schemes:
            schemes.append(scheme)
    return tuple(schemes)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaysim",
        description=(
            "Monte Carlo outage sweep for two-hop multi-antenna relay "
            "networks, with optional analytical bound columns."
        ),
    )
    parser.add_argument(
        "--partitions",
        required=True,
        help='semicolon-separated antenna partitions, e.g. "4;2,2;1,1,1,1"',
    )
    parser.add_argument(
        "--snr-db",
        required=True,
        help="transmit power grid in dB: start:stop:step, or a single value",
    )
    parser.add_argument("--rate", type=float, default=1.0, help="target rate in bits/s/Hz")
    parser.add_argument("--trials", type=int, default=1_000_000, help="Monte Carlo trials")
    parser.add_argument("--seed", type=int, default=42, help="random seed")
    parser.add_argument(
        "--schemes",
        default=",".join(s.value for s in Scheme),
        help="comma-separated scheme list (default: all)",
    )
    parser.add_argument(
        "--bounds",
        action="store_true",
        help="fill the analytical bound columns (empty otherwise)",
    )
    parser.add_argument("--out", default="results.csv", help="output CSV path")
    parser.add_argument(
        "--workers", type=int, default=1, help="worker threads (does not affect results)"
    )
    return parser


def parse_args(argv: Sequence[str] | None = None) -> SweepSpec:
    """Parse and validate the command line into a :class:`SweepSpec`."""
    args = build_parser().parse_args(argv)
    partitions = parse_partition_list(args.partitions)
    snr_db = parse_snr_grid(args.snr_db)
    schemes = parse_scheme_list(args.schemes)
    if args.rate <= 0:
        raise CliError(EXIT_BAD_OPTION, "--rate: must be positive")
    if args.trials < 1:
        raise CliError(EXIT_BAD_OPTION, "--trials: must be at least 1")
    if args.workers < 1:
        raise CliError(EXIT_BAD_OPTION, "--workers: must be at least 1")
    return SweepSpec(
        partitions=partitions,
        snr_db=snr_db,
        rate=args.rate,
        trials=args.trials,
        seed=args.seed,
        schemes=schemes,
        bounds=args.bounds,
        out=args.out,
        workers=args.workers,
    )


def _fmt_prob(value: float) -> str:
    return f"{value:.10g}"


def run_sweep(spec: SweepSpec) -> Path:
    """Run the configured sweep and write the CSV; returns the output path."""
    eta_by_db = {db: 10.0 ** (db / 10.0) for db in spec.snr_db}
    config = SimConfig(
        partitions=spec.partitions,
        eta_grid=tuple(eta_by_db[db] for db in spec.snr_db),
        rate=spec.rate,
        trials=spec.trials,
        seed=spec.seed,
        schemes=spec.schemes,
        workers=spec.workers,
    )
    results = estimate_outage(config)

    rows = []
    for scheme in sorted(spec.schemes, key=lambda s: s.value):
        for partition in sorted(spec.partitions, key=lambda p: p.m):
            for db in sorted(set(spec.snr_db)):
                eta = eta_by_db[db]
                est = results[(scheme, partition, eta)]
                if spec.bounds:
                    if scheme.is_selection:
                        bound = selection_outage_bounds(partition, spec.rate, eta)
                    else:
                        bound = genie_outage_bounds(partition.n, spec.rate, eta)
                    bound_cols = [_fmt_prob(bound.lower), _fmt_prob(bound.upper)]
                else:
                    bound_cols = ["", ""]
                rows.append(
                    [
                        scheme.value,
                        str(partition),
                        f"{db:g}",
                        f"{spec.rate:g}",
                        str(spec.trials),
                        str(est.outages),
                        _fmt_prob(est.p_hat),
                        _fmt_prob(est.ci_low),
                        _fmt_prob(est.ci_high),
                        *bound_cols,
                    ]
                )

    path = Path(spec.out)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        writer.writerows(rows)
        handle.write(f"# seed={spec.seed}\n")
    return path


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entry; returns an exit code instead of raising SystemExit."""
    try:
        spec = parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    try:
        path = run_sweep(spec)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: --out: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    n_rows = len(spec.schemes) * len(spec.partitions) * len(set(spec.snr_db))
    print(f"wrote {path} ({n_rows} rows)")
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main(sys.argv[1:]))
