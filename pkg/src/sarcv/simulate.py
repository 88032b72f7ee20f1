"""Field simulators: exact transport sampling and a long-span volatility model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import ConfigError
from .kernels import KERNEL_NAMES, SpatialGrid, kernel_matrix
from .linalg import cholesky_psd

__all__ = [
    "GENERATOR_ID",
    "STREAM_RULE",
    "SimConfig",
    "JumpRecord",
    "HeidihConfig",
    "run_stream_seed",
    "noise_cholesky",
    "simulate_field",
    "ou_transition",
    "simulate_heidih_field",
]

GENERATOR_ID = "numpy-pcg64"
STREAM_RULE = "seed-sequence-spawn-key(run_index)"


def run_stream_seed(master_seed: int, run_index: int) -> int:
    """Derive the seed of one run's private stream from the master seed."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(run_index,))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SimConfig:
    """Transport-field scenario: grid density, driver kernel, and jump law.

    ``noise_scale`` multiplies the per-step noise covariance and exists as a
    degenerate test hook; zero turns the Gaussian driver off entirely.
    """

    n: int
    kernel: str = "gauss"
    jump_intensity: float = 0.0
    jump_variance: float = 0.0
    seed: int = 0
    noise_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if self.kernel not in KERNEL_NAMES:
            raise ConfigError(f"kernel must be one of {KERNEL_NAMES}, got {self.kernel!r}")
        if self.jump_intensity < 0:
            raise ConfigError("jump_intensity must be non-negative")
        if self.jump_variance < 0:
            raise ConfigError("jump_variance must be non-negative")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be non-negative")


@dataclass(frozen=True)
class JumpRecord:
    """One spatially constant level shift: when it landed and what it added."""

    time: float
    size: float
    covered_step: int

    def __post_init__(self) -> None:
        if not 0.0 < self.time <= 1.0:
            raise ValueError(f"time must lie in (0, 1], got {self.time}")
        if self.covered_step < 1:
            raise ValueError(f"covered_step must be at least 1, got {self.covered_step}")


@dataclass(frozen=True)
class HeidihConfig:
    """Long-span forward-curve scenario with Ornstein-Uhlenbeck volatility.

    ``driver_scale`` multiplies the scalar Brownian driver and exists as a
    test hook; zero freezes the field at its flat start.
    """

    n: int
    horizon: int
    eta: float = 1.0
    modes: int = 100
    substeps: int = 10
    seed: int = 0
    driver_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon}")
        if self.eta <= 0:
            raise ConfigError("eta must be positive")
        if not 1 <= self.modes <= 4 * self.n:
            raise ConfigError(
                f"modes must lie in 1..{4 * self.n}; the grid resolves no higher frequencies"
            )
        if self.substeps < 1:
            raise ConfigError("substeps must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.driver_scale < 0:
            raise ConfigError("driver_scale must be non-negative")


def _extended_width(n: int) -> int:
    # covers j = 1..n+2 at every time row once the window shrinks by one per step
    return 2 * n + 2


def noise_cholesky(cfg: SimConfig) -> np.ndarray:
    """Cholesky factor of the per-step noise covariance on the extended grid.

    Computed once per scenario and shared across runs. Truncating a full draw
    to a leading window is exact: the leading principal block of a Cholesky
    factor is the factor of the leading principal block.
    """
    width = _extended_width(cfg.n)
    if cfg.noise_scale == 0.0:
        return np.zeros((width, width))
    cov = kernel_matrix(cfg.kernel, SpatialGrid(cfg.n, width), cfg.noise_scale / cfg.n)
    return cholesky_psd(cov)


def simulate_field(cfg: SimConfig, chol: np.ndarray | None = None):
    """Sample the transport field exactly on the (n+1) x (n+1) window.

    Returns ``(samples, jumps)``: rows of ``samples`` are time steps 0..n,
    columns the grid points x_1..x_{n+1}; ``jumps`` is sorted by time. The
    recursion runs on an extended grid shrinking by one column per step, so
    each row can read one column past its successor's window, and adjusted
    increments of the output equal the drawn noise vectors exactly whenever
    no jump lands in the step. Field noise and jumps use independent child
    streams of the seed, so rerunning with a different jump law leaves the
    continuous part bit-identical.
    """
    n = cfg.n
    width = _extended_width(n)
    if chol is None:
        chol = noise_cholesky(cfg)
    else:
        chol = np.asarray(chol, dtype=float)
        if chol.shape != (width, width):
            raise ValueError(f"chol must have shape ({width}, {width}), got {chol.shape}")

    field_seq, jump_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    field_rng = np.random.Generator(np.random.PCG64(field_seq))
    jump_rng = np.random.Generator(np.random.PCG64(jump_seq))

    samples = np.zeros((n + 1, width))
    noise = field_rng.standard_normal((n, width)) @ chol.T
    for i in range(1, n + 1):
        active = width - i
        samples[i, :active] = samples[i - 1, 1 : active + 1] + noise[i - 1, :active]

    records: list[JumpRecord] = []
    count = int(jump_rng.poisson(cfg.jump_intensity))
    if count:
        times = 1.0 - jump_rng.random(count)  # lands in (0, 1]
        sizes = jump_rng.normal(0.0, math.sqrt(cfg.jump_variance), count)
        records = [
            JumpRecord(
                time=float(t),
                size=float(z),
                covered_step=max(1, math.ceil(t * n)),
            )
            for t, z in zip(times, sizes)
        ]
        records.sort(key=lambda rec: rec.time)
        for rec in records:
            samples[rec.covered_step :, :] += rec.size

    return samples[:, : n + 1].copy(), records


def ou_transition(lam, delta: float):
    """Exact one-step law of dy = -lam * y dt + dW over a step of length delta.

    Returns ``(decay, innovation_std)``: y' = decay * y + innovation_std * xi
    with xi standard normal reproduces the transition exactly, so long paths
    stay on the stationary law Normal(0, 1/(2*lam)). Accepts scalar or array
    mean-reversion rates.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("mean-reversion rates must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    decay = np.exp(-lam * delta)
    return decay, np.sqrt((1.0 - decay * decay) / (2.0 * lam))


def simulate_heidih_field(cfg: HeidihConfig) -> np.ndarray:
    """Euler scheme for the stochastic volatility transport model.

    The volatility curve Y_t = sum_k y_k(t) e_k has independent
    Ornstein-Uhlenbeck coefficients with rates k^2 pi^2 / eta, started from
    their stationary law and advanced by the exact transition on a substep
    lattice; per substep the field picks up Y_t * dBeta from one scalar
    Brownian driver with the volatility frozen at the substep start. Shifts
    happen one whole grid cell per observation step, with points beyond x=1
    pinned to zero. Rows are observation times 0..T*n, columns the grid
    points x_1..x_{n+1}.
    """
    n, modes, m = cfg.n, cfg.modes, cfg.substeps
    steps = cfg.horizon * n
    delta = 1.0 / (n * m)
    k = np.arange(1, modes + 1)
    rates = (k * math.pi) ** 2 / cfg.eta
    decay, innov_std = ou_transition(rates, delta)

    x = np.arange(1, n + 1) / n
    basis = math.sqrt(2.0) * np.sin(np.outer(k, x) * math.pi)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    y = np.sqrt(0.5 / rates) * rng.standard_normal(modes)
    field = np.zeros((steps + 1, n + 1))
    db_std = math.sqrt(delta) * cfg.driver_scale
    for i in range(1, steps + 1):
        xi = rng.standard_normal((m, modes))
        db = db_std * rng.standard_normal(m)
        w_eff = np.zeros(modes)
        for s in range(m):
            w_eff += db[s] * y
            y = decay * y + innov_std * xi[s]
        field[i, :n] = field[i - 1, 1:] + w_eff @ basis
    return field
