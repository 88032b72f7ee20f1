"""Monte Carlo orchestration, summaries, tables, and scenario configs."""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from io import StringIO

import csv

import numpy as np

from ._validation import ConfigError, NumericError
from .analysis import RateFit, d_explained, fit_power_law, rel_err
from .covariation import EstimatorSpec, long_span_estimate, realized_covariation
from .increments import ADJUSTED, PLAIN, adjusted_increments, plain_increments
from .kernels import SpatialGrid, kernel_matrix
from .linalg import sym_eigen
from .simulate import (
    GENERATOR_ID,
    STREAM_RULE,
    HeidihConfig,
    SimConfig,
    noise_cholesky,
    run_stream_seed,
    simulate_field,
    simulate_heidih_field,
)
from .truncation import MahalanobisRule, NormThreshold, select_flags

__all__ = [
    "D_TARGET",
    "ESTIMATOR_NAMES",
    "estimator_spec",
    "ScenarioConfig",
    "RunRecord",
    "MCResult",
    "SummaryRow",
    "run_monte_carlo",
    "summarize",
    "emit_runs",
    "emit_table",
    "scenario_metadata",
    "table1_scenarios",
    "rate_sweep",
    "heidih_sweep",
    "load_config",
]

D_TARGET = 0.95
ESTIMATOR_NAMES = ("sarcv", "rcv", "sarcv_", "rcv_")

_ESTIMATOR_SPECS = {
    "sarcv": EstimatorSpec(kind=ADJUSTED, keep="all"),
    "rcv": EstimatorSpec(kind=PLAIN, keep="all"),
    "sarcv_": EstimatorSpec(kind=ADJUSTED, keep="small"),
    "rcv_": EstimatorSpec(kind=PLAIN, keep="small"),
}

_NAME_RE = re.compile(r"[A-Za-z0-9._-]+")

_FAILURE_LIMIT = 0.01

_SCHEMA_VERSION = 1


def estimator_spec(name: str) -> EstimatorSpec:
    """Estimator definition behind a short table label."""
    try:
        return _ESTIMATOR_SPECS[name]
    except KeyError:
        raise ConfigError(f"unknown estimator {name!r}, expected one of {ESTIMATOR_NAMES}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    """One Monte Carlo scenario: a simulator, estimators, and run bookkeeping."""

    name: str
    sim: SimConfig | HeidihConfig
    estimators: tuple = ESTIMATOR_NAMES
    truncation: MahalanobisRule | NormThreshold | None = None
    runs: int = 1
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.name or _NAME_RE.fullmatch(self.name) is None:
            raise ConfigError(f"scenario name must be nonempty and filesystem-safe, got {self.name!r}")
        if not isinstance(self.sim, (SimConfig, HeidihConfig)):
            raise ConfigError("sim must be a SimConfig or HeidihConfig")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.estimators:
            raise ConfigError("estimators must be nonempty")
        for name in self.estimators:
            estimator_spec(name)
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimators must be distinct")
        if isinstance(self.sim, HeidihConfig) and len(self.estimators) != 1:
            raise ConfigError("long-span scenarios take exactly one estimator label")
        if self.truncation is not None and not isinstance(self.truncation, (MahalanobisRule, NormThreshold)):
            raise ConfigError("truncation must be a MahalanobisRule, NormThreshold, or None")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be a non-negative integer")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


@dataclass(frozen=True)
class RunRecord:
    """One estimator's result on one simulated path."""

    scenario: str
    run_index: int
    estimator: str
    rel_err: float
    d95: int
    n_flagged: int


@dataclass(frozen=True)
class MCResult:
    """All per-run records of a scenario plus the runs that failed."""

    config: ScenarioConfig
    records: tuple
    failures: tuple

    @property
    def failed_runs(self) -> int:
        return len(self.failures)


@dataclass(frozen=True)
class SummaryRow:
    """Quartile summary of one metric for one estimator in one scenario."""

    scenario: str
    estimator: str
    metric: str
    median: float
    q25: float
    q75: float
    runs: int

    def __post_init__(self) -> None:
        if self.metric not in ("rel_err", "d95"):
            raise ValueError(f"metric must be rel_err or d95, got {self.metric!r}")
        if not self.q25 <= self.median <= self.q75:
            raise ValueError(
                f"quantiles out of order: q25={self.q25}, median={self.median}, q75={self.q75}"
            )


@lru_cache(maxsize=8)
def _field_context(kernel: str, n: int, noise_scale: float):
    chol = noise_cholesky(SimConfig(n=n, kernel=kernel, noise_scale=noise_scale))
    truth = kernel_matrix(kernel, SpatialGrid(n, n), noise_scale if noise_scale > 0 else 1.0)
    return chol, truth


@lru_cache(maxsize=8)
def _heidih_truth(n: int, eta: float) -> np.ndarray:
    return kernel_matrix("bridge", SpatialGrid(n, n), 1.0, eta=eta)


def _run_one(cfg: ScenarioConfig, run_index: int) -> list:
    seed = run_stream_seed(cfg.master_seed, run_index)
    sim = replace(cfg.sim, seed=seed)

    if isinstance(sim, HeidihConfig):
        truth = _heidih_truth(sim.n, sim.eta)
        samples = simulate_heidih_field(sim)
        estimate = long_span_estimate(samples, cfg.truncation, 2.0 / sim.horizon)
        n_flagged = 0
        if cfg.truncation is not None:
            report = select_flags(adjusted_increments(samples), cfg.truncation, 1.0 / sim.n)
            n_flagged = report.n_flagged
        return [
            RunRecord(
                scenario=cfg.name,
                run_index=run_index,
                estimator=cfg.estimators[0],
                rel_err=rel_err(estimate, truth),
                d95=d_explained(sym_eigen(estimate).values, D_TARGET),
                n_flagged=n_flagged,
            )
        ]

    chol, truth = _field_context(sim.kernel, sim.n, sim.noise_scale)
    samples, _ = simulate_field(sim, chol)
    delta = 1.0 / sim.n
    increments = {}
    reports = {}
    records = []
    for name in cfg.estimators:
        spec = estimator_spec(name)
        if spec.kind not in increments:
            make = adjusted_increments if spec.kind == ADJUSTED else plain_increments
            increments[spec.kind] = make(samples)
        inc = increments[spec.kind]
        flags = None
        n_flagged = 0
        if spec.keep != "all":
            if spec.kind not in reports:
                reports[spec.kind] = select_flags(inc, cfg.truncation, delta)
            flags = reports[spec.kind].flags
            n_flagged = reports[spec.kind].n_flagged
        estimate = realized_covariation(inc, spec, flags)
        records.append(
            RunRecord(
                scenario=cfg.name,
                run_index=run_index,
                estimator=name,
                rel_err=rel_err(estimate, truth),
                d95=d_explained(sym_eigen(estimate).values, D_TARGET),
                n_flagged=n_flagged,
            )
        )
    return records


def _run_chunk(cfg: ScenarioConfig, indices) -> list:
    out = []
    for idx in indices:
        try:
            out.append((idx, _run_one(cfg, idx), None))
        except (NumericError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            out.append((idx, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_monte_carlo(cfg: ScenarioConfig) -> MCResult:
    """Run all scenario repetitions and collect per-run records.

    Each run owns a private stream derived from the master seed and its run
    index, so the records do not depend on the worker count or on scheduling.
    Failed runs are excluded and counted; more than 1% of them aborts.
    """
    indices = list(range(cfg.runs))
    if cfg.workers == 1:
        raw = _run_chunk(cfg, indices)
    else:
        chunk = max(1, math.ceil(cfg.runs / (cfg.workers * 4)))
        batches = [indices[i : i + chunk] for i in range(0, len(indices), chunk)]
        raw = []
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for part in pool.map(_run_chunk, [cfg] * len(batches), batches):
                raw.extend(part)
    raw.sort(key=lambda item: item[0])

    records = []
    failures = []
    for idx, recs, err in raw:
        if err is None:
            records.extend(recs)
        else:
            failures.append((idx, err))
    if len(failures) > _FAILURE_LIMIT * cfg.runs:
        detail = "; ".join(f"run {idx}: {err}" for idx, err in failures[:5])
        raise NumericError(
            f"{len(failures)} of {cfg.runs} runs failed in scenario {cfg.name!r} ({detail})"
        )
    return MCResult(config=cfg, records=tuple(records), failures=tuple(failures))


def summarize(records) -> tuple:
    """Quartile rows for every (scenario, estimator, metric) in the records.

    Groups appear in first-occurrence order; quantiles use linear
    interpolation between order statistics.
    """
    records = list(records)
    if not records:
        raise ValueError("records must be nonempty")
    groups = {}
    for rec in records:
        groups.setdefault((rec.scenario, rec.estimator), []).append(rec)
    rows = []
    for (scenario, estimator), recs in groups.items():
        for metric, values in (
            ("rel_err", [r.rel_err for r in recs]),
            ("d95", [float(r.d95) for r in recs]),
        ):
            q25, median, q75 = np.quantile(values, [0.25, 0.5, 0.75])
            rows.append(
                SummaryRow(
                    scenario=scenario,
                    estimator=estimator,
                    metric=metric,
                    median=float(median),
                    q25=float(q25),
                    q75=float(q75),
                    runs=len(values),
                )
            )
    return tuple(rows)


def _csv_writer(buffer):
    return csv.writer(buffer, lineterminator="\n")


def emit_runs(records) -> str:
    """Per-run records as CSV text, one line per (run, estimator)."""
    records = list(records)
    if not records:
        raise ValueError("records must be nonempty")
    buffer = StringIO()
    writer = _csv_writer(buffer)
    writer.writerow(["scenario", "run_index", "estimator", "rel_err", "d95", "n_flagged"])
    for rec in records:
        writer.writerow(
            [rec.scenario, rec.run_index, rec.estimator, repr(rec.rel_err), rec.d95, rec.n_flagged]
        )
    return buffer.getvalue()


def _table1_group(scenario: str) -> str:
    for suffix in ("_nojump", "_jump"):
        if scenario.endswith(suffix):
            return scenario[: -len(suffix)]
    return scenario


def emit_table(rows, layout: str) -> str:
    """Summary rows as CSV text.

    Layout ``long`` writes the summary columns verbatim. Layout ``table1``
    pivots to one row per (kernel, metric) with the estimator columns sarcv,
    rcv, sarcv_, rcv_; cells read "median (q25, q75)", two decimals for
    rel_err and whole numbers for d95. Scenario names ending in ``_nojump``
    or ``_jump`` land in the same kernel row.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("rows must be nonempty")
    buffer = StringIO()
    writer = _csv_writer(buffer)
    if layout == "long":
        writer.writerow(["scenario", "estimator", "metric", "median", "q25", "q75", "runs"])
        for row in rows:
            writer.writerow(
                [row.scenario, row.estimator, row.metric,
                 repr(row.median), repr(row.q25), repr(row.q75), row.runs]
            )
    elif layout == "table1":
        cells = {}
        groups = []
        for row in rows:
            group = _table1_group(row.scenario)
            if group not in groups:
                groups.append(group)
            digits = 2 if row.metric == "rel_err" else 0
            cells[(group, row.metric, row.estimator)] = (
                f"{row.median:.{digits}f} ({row.q25:.{digits}f}, {row.q75:.{digits}f})"
            )
        writer.writerow(["kernel", "metric", *ESTIMATOR_NAMES])
        for group in groups:
            for metric in ("rel_err", "d95"):
                line = [cells.get((group, metric, name), "") for name in ESTIMATOR_NAMES]
                if any(line):
                    writer.writerow([group, metric, *line])
    else:
        raise ValueError(f"layout must be 'long' or 'table1', got {layout!r}")
    return buffer.getvalue()


def scenario_metadata(configs, failed_runs: int = 0) -> str:
    """Deterministic JSON describing how a set of scenarios was executed."""
    if isinstance(configs, ScenarioConfig):
        configs = [configs]
    configs = list(configs)
    if not configs:
        raise ValueError("configs must be nonempty")
    entries = []
    for cfg in configs:
        sim = cfg.sim
        entries.append(
            {
                "name": cfg.name,
                "model": "heidih" if isinstance(sim, HeidihConfig) else "field",
                "sim": {k: getattr(sim, k) for k in sim.__dataclass_fields__},
                "estimators": list(cfg.estimators),
                "truncation": (
                    None
                    if cfg.truncation is None
                    else {
                        "rule": "mahalanobis" if isinstance(cfg.truncation, MahalanobisRule) else "norm",
                        **{k: getattr(cfg.truncation, k) for k in cfg.truncation.__dataclass_fields__},
                    }
                ),
                "runs": cfg.runs,
                "master_seed": cfg.master_seed,
                "workers": cfg.workers,
            }
        )
    payload = {
        "schema_version": _SCHEMA_VERSION,
        "generator": GENERATOR_ID,
        "stream_rule": STREAM_RULE,
        "quantile_convention": "linear interpolation between order statistics",
        "failed_runs": failed_runs,
        "scenarios": entries,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def table1_scenarios(runs: int = 1000, master_seed: int = 0, workers: int = 1) -> tuple:
    """The four simulation-study scenarios behind the summary table.

    Smooth and rough kernels, each without jumps (plain and adjusted
    estimators) and with compound Poisson jumps at intensity 2 and size
    variance 0.1 (their truncated versions under the preliminary-estimate
    rule).
    """
    rule = MahalanobisRule()
    out = []
    for label, kernel in (("smooth", "gauss"), ("rough", "laplace")):
        out.append(
            ScenarioConfig(
                name=f"{label}_nojump",
                sim=SimConfig(n=100, kernel=kernel),
                estimators=("sarcv", "rcv"),
                truncation=None,
                runs=runs,
                master_seed=master_seed,
                workers=workers,
            )
        )
        out.append(
            ScenarioConfig(
                name=f"{label}_jump",
                sim=SimConfig(n=100, kernel=kernel, jump_intensity=2.0, jump_variance=0.1),
                estimators=("sarcv_", "rcv_"),
                truncation=rule,
                runs=runs,
                master_seed=master_seed,
                workers=workers,
            )
        )
    return tuple(out)


def rate_sweep(
    sizes,
    runs: int,
    master_seed: int = 0,
    workers: int = 1,
    kernel: str = "gauss",
    jump_intensity: float = 0.0,
    jump_variance: float = 0.0,
    truncation=None,
    estimator: str = "sarcv",
) -> RateFit:
    """Median error per grid size and the fitted convergence slope.

    Each size gets its own scenario with a seed derived from the master seed
    and the size, so refining the grid does not reuse draws.
    """
    sizes = tuple(int(n) for n in sizes)
    medians = []
    for n in sizes:
        cfg = ScenarioConfig(
            name=f"rate_{kernel}_n{n}",
            sim=SimConfig(
                n=n, kernel=kernel, jump_intensity=jump_intensity, jump_variance=jump_variance
            ),
            estimators=(estimator,),
            truncation=truncation,
            runs=runs,
            master_seed=run_stream_seed(master_seed, n),
            workers=workers,
        )
        rows = summarize(run_monte_carlo(cfg).records)
        medians.append(next(r.median for r in rows if r.metric == "rel_err"))
    return fit_power_law(sizes, medians)


def heidih_sweep(
    horizons,
    runs: int,
    n: int = 50,
    eta: float = 1.0,
    modes: int | None = None,
    substeps: int = 10,
    master_seed: int = 0,
    workers: int = 1,
) -> tuple:
    """Long-span estimation error per horizon as summary rows.

    ``modes=None`` keeps the default mode count capped at the grid's highest
    resolvable frequency.
    """
    if modes is None:
        modes = min(100, 4 * n)
    rows = []
    for horizon in horizons:
        cfg = ScenarioConfig(
            name=f"heidih_T{int(horizon)}",
            sim=HeidihConfig(n=n, horizon=int(horizon), eta=eta, modes=modes, substeps=substeps),
            estimators=("sarcv",),
            truncation=None,
            runs=runs,
            master_seed=run_stream_seed(master_seed, int(horizon)),
            workers=workers,
        )
        result = run_monte_carlo(cfg)
        rows.extend(r for r in summarize(result.records) if r.metric == "rel_err")
    return tuple(rows)


def _config_error(message: str) -> ConfigError:
    return ConfigError(f"config file: {message}")


def _build_sim(model: str, raw: dict):
    if not isinstance(raw, dict):
        raise _config_error("'sim' must be a table of simulator fields")
    raw = dict(raw)
    try:
        if model == "field":
            raw.setdefault("n", 100)
            raw.setdefault("kernel", "gauss")
            raw.setdefault("jump_intensity", 2.0)
            raw.setdefault("jump_variance", 0.1)
            return SimConfig(**raw)
        if model == "heidih":
            return HeidihConfig(**raw)
    except TypeError as exc:
        raise _config_error(f"bad simulator fields: {exc}") from None
    raise _config_error(f"model must be 'field' or 'heidih', got {model!r}")


def _build_truncation(raw):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise _config_error("'truncation' must be null or a table with a 'rule' key")
    raw = dict(raw)
    rule = raw.pop("rule", "mahalanobis")
    try:
        if rule == "mahalanobis":
            return MahalanobisRule(**raw)
        if rule == "norm":
            return NormThreshold(**raw)
    except (TypeError, ValueError) as exc:
        raise _config_error(f"bad truncation fields: {exc}") from None
    raise _config_error(f"truncation rule must be 'mahalanobis' or 'norm', got {rule!r}")


def load_config(path) -> ScenarioConfig:
    """Read one scenario from a JSON config file.

    The file needs ``schema_version`` 1 and a ``scenario`` table. Simulator
    defaults mirror the simulation study: n=100, Gauss kernel, jump intensity
    2, jump variance 0.1, and the preliminary-estimate truncation rule with
    discard fraction 0.25, explained-variance target 0.9, multiplier 3, and
    exponent 0.49.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise _config_error(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _config_error(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise _config_error("top level must be an object")
    version = data.get("schema_version")
    if version != _SCHEMA_VERSION:
        raise _config_error(f"schema_version must be {_SCHEMA_VERSION}, got {version!r}")
    raw = data.get("scenario")
    if not isinstance(raw, dict):
        raise _config_error("missing 'scenario' table")
    raw = dict(raw)
    model = raw.pop("model", "field")
    sim = _build_sim(model, raw.pop("sim", {}))
    truncation = _build_truncation(raw.pop("truncation", {"rule": "mahalanobis"}))
    estimators = raw.pop("estimators", list(ESTIMATOR_NAMES))
    if isinstance(estimators, str):
        estimators = [estimators]
    try:
        return ScenarioConfig(
            name=raw.pop("name", "scenario"),
            sim=sim,
            estimators=tuple(estimators),
            truncation=truncation,
            **raw,
        )
    except TypeError as exc:
        raise _config_error(f"bad scenario fields: {exc}") from None
