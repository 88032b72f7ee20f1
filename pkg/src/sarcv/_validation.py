"""Argument checking helpers and the package exception hierarchy."""

from __future__ import annotations

import numpy as np

__all__ = [
    "NumericError",
    "DegenerateSpectrumError",
    "ConfigError",
    "as_matrix",
    "as_square_matrix",
    "check_symmetric",
]


class NumericError(RuntimeError):
    """A numerical procedure failed (factorization, degenerate spectrum, aborted scenario)."""


class DegenerateSpectrumError(NumericError):
    """An eigenvalue needed with strictly positive value is zero or negative."""


class ConfigError(ValueError):
    """A configuration file or CLI argument is invalid."""


def as_matrix(x, name: str = "x") -> np.ndarray:
    """Coerce to a 2-d float array with finite entries."""
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_square_matrix(x, name: str = "x") -> np.ndarray:
    m = as_matrix(x, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def check_symmetric(m: np.ndarray, rel_tol: float = 1e-12, name: str = "m") -> None:
    """Require max |m - m.T| <= rel_tol relative to the largest entry magnitude."""
    scale = max(1.0, float(np.abs(m).max()))
    asym = float(np.abs(m - m.T).max())
    if asym > rel_tol * scale:
        raise ValueError(f"{name} is not symmetric: max asymmetry {asym:.3e} "
                         f"exceeds {rel_tol:.0e} relative tolerance")
