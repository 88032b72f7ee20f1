"""Command line entry points for simulation, estimation, and reports."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from io import StringIO

import numpy as np

from ._validation import ConfigError, NumericError
from .analysis import d_explained
from .covariation import realized_covariation
from .increments import ADJUSTED, PLAIN, adjusted_increments, plain_increments
from .linalg import sym_eigen
from .montecarlo import (
    ESTIMATOR_NAMES,
    emit_runs,
    emit_table,
    estimator_spec,
    heidih_sweep,
    load_config,
    rate_sweep,
    run_monte_carlo,
    scenario_metadata,
    summarize,
    table1_scenarios,
)
from .simulate import SimConfig, simulate_field
from .truncation import MahalanobisRule, select_flags

__all__ = ["main"]


def _write_text(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    print(f"wrote {path}")
    return path


def _matrix_csv(matrix: np.ndarray, prefix: str = "x") -> str:
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"{prefix}_{j}" for j in range(1, matrix.shape[1] + 1)])
    for row in matrix:
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def _read_matrix_csv(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if len(rows) < 2:
        raise ConfigError(f"{path} must have a header row and at least one data row")
    width = len(rows[0])
    data = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise ConfigError(f"{path}:{line_no}: expected {width} columns, got {len(row)}")
        try:
            data.append([float(v) for v in row])
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: {exc}") from None
    return np.asarray(data)


def _int_list(text: str) -> list:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _cmd_simulate(args) -> int:
    cfg = SimConfig(
        n=args.n,
        kernel=args.kernel,
        jump_intensity=args.jump_intensity,
        jump_variance=args.jump_variance,
        seed=args.seed,
    )
    samples, jumps = simulate_field(cfg)
    _write_text(args.out, "samples.csv", _matrix_csv(samples))
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["time", "size", "covered_step"])
    for rec in jumps:
        writer.writerow([repr(rec.time), repr(rec.size), rec.covered_step])
    _write_text(args.out, "jumps.csv", buffer.getvalue())
    return 0


def _cmd_estimate(args) -> int:
    samples = _read_matrix_csv(args.input)
    if samples.shape[0] < 2 or samples.shape[1] < 2:
        raise ConfigError(f"{args.input}: need at least 2 rows and 2 columns of samples")
    rule = None if args.truncation == "none" else MahalanobisRule()
    delta = args.delta if args.delta is not None else 1.0 / (samples.shape[1] - 1)

    increments = {ADJUSTED: adjusted_increments(samples), PLAIN: plain_increments(samples)}
    reports = {kind: select_flags(inc, rule, delta) for kind, inc in increments.items()}
    for name in ESTIMATOR_NAMES:
        spec = estimator_spec(name)
        flags = reports[spec.kind].flags if spec.keep != "all" else None
        estimate = realized_covariation(increments[spec.kind], spec, flags)
        _write_text(args.out, f"{name}.csv", _matrix_csv(estimate))
        d95 = d_explained(sym_eigen(estimate).values, 0.95)
        print(f"{name}: d95={d95}")

    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["kind", "row_index", "flagged"])
    for kind in (ADJUSTED, PLAIN):
        for i, value in enumerate(reports[kind].flags, start=1):
            writer.writerow([kind, i, int(value)])
    _write_text(args.out, "flags.csv", buffer.getvalue())
    return 0


def _cmd_mc(args) -> int:
    cfg = load_config(args.config)
    if args.runs is not None:
        cfg = replace(cfg, runs=args.runs)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    result = run_monte_carlo(cfg)
    rows = summarize(result.records)
    _write_text(args.out, "runs.csv", emit_runs(result.records))
    _write_text(args.out, "summary.csv", emit_table(rows, "long"))
    _write_text(args.out, "table1.csv", emit_table(rows, "table1"))
    _write_text(args.out, "metadata.json", scenario_metadata(cfg, result.failed_runs))
    return 0


def _cmd_table1(args) -> int:
    records = []
    failed = 0
    scenarios = table1_scenarios(runs=args.runs, master_seed=args.seed, workers=args.workers)
    for cfg in scenarios:
        result = run_monte_carlo(cfg)
        records.extend(result.records)
        failed += result.failed_runs
    rows = summarize(records)
    _write_text(args.out, "runs.csv", emit_runs(records))
    _write_text(args.out, "summary.csv", emit_table(rows, "long"))
    _write_text(args.out, "table1.csv", emit_table(rows, "table1"))
    _write_text(args.out, "metadata.json", scenario_metadata(scenarios, failed))
    return 0


def _cmd_rate(args) -> int:
    if len(args.sizes) < 3:
        raise ConfigError("--sizes needs at least 3 grid sizes to fit a slope")
    rule = MahalanobisRule() if args.truncation == "mahalanobis" else None
    estimator = args.estimator
    if estimator is None:
        estimator = "sarcv_" if rule is not None else "sarcv"
    fit = rate_sweep(
        sizes=args.sizes,
        runs=args.runs,
        master_seed=args.seed,
        workers=args.workers,
        kernel=args.kernel,
        jump_intensity=args.jump_intensity,
        jump_variance=args.jump_variance,
        truncation=rule,
        estimator=estimator,
    )
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "median_rel_err"])
    for n, err in zip(fit.grid_sizes, fit.median_errors):
        writer.writerow([n, repr(err)])
    _write_text(args.out, "rate.csv", buffer.getvalue())
    print(f"slope={fit.slope:.4f} intercept={fit.intercept:.4f}")
    return 0


def _cmd_heidih(args) -> int:
    rows = heidih_sweep(
        horizons=args.horizons,
        runs=args.runs,
        n=args.n,
        eta=args.eta,
        modes=args.modes,
        substeps=args.substeps,
        master_seed=args.seed,
        workers=args.workers,
    )
    buffer = StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["scenario", "median_rel_err", "q25", "q75", "runs"])
    for row in rows:
        writer.writerow([row.scenario, repr(row.median), repr(row.q25), repr(row.q75), row.runs])
    _write_text(args.out, "heidih.csv", buffer.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarcv",
        description="Semigroup-adjusted realized covariation: simulators, estimators, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed=True, runs=None, workers=True):
        if seed:
            p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        if runs is not None:
            p.add_argument("--runs", type=int, default=runs, help=f"Monte Carlo runs (default {runs})")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("--out", default=".", help="output directory (default: current)")

    p = sub.add_parser("simulate", help="sample one transport field and dump it as CSV")
    p.add_argument("--n", type=int, default=100, help="grid density (default 100)")
    p.add_argument("--kernel", default="gauss", help="driver kernel id (default gauss)")
    p.add_argument("--jump-intensity", type=float, default=0.0)
    p.add_argument("--jump-variance", type=float, default=0.0)
    add_common(p, workers=False)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate covariations from a sample CSV")
    p.add_argument("--input", required=True, help="sample matrix CSV (header row + one row per time)")
    p.add_argument("--truncation", choices=("mahalanobis", "none"), default="mahalanobis")
    p.add_argument("--delta", type=float, default=None, help="step size (default 1/(columns-1))")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("mc", help="run one Monte Carlo scenario from a config file")
    p.add_argument("--config", required=True, help="JSON scenario config")
    p.add_argument("--runs", type=int, default=None, help="override config runs")
    p.add_argument("--seed", type=int, default=None, help="override config master seed")
    p.add_argument("--workers", type=int, default=None, help="override config workers")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("table1", help="run the four benchmark scenarios and emit the summary table")
    add_common(p, runs=1000)
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("rate", help="median error across grid sizes and the log-log slope")
    p.add_argument("--kernel", default="gauss")
    p.add_argument("--sizes", type=_int_list, default=[50, 100, 200, 400])
    p.add_argument("--jump-intensity", type=float, default=0.0)
    p.add_argument("--jump-variance", type=float, default=0.0)
    p.add_argument("--truncation", choices=("mahalanobis", "none"), default="none")
    p.add_argument("--estimator", choices=ESTIMATOR_NAMES, default=None)
    add_common(p, runs=500)
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("heidih", help="long-span estimation error across horizons")
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--horizons", type=_int_list, default=[25, 50, 200])
    p.add_argument("--modes", type=int, default=None, help="volatility modes (default min(100, 4n))")
    p.add_argument("--substeps", type=int, default=10)
    add_common(p, runs=50)
    p.set_defaults(func=_cmd_heidih)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
