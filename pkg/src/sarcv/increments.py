"""Adjusted and plain increments of a sampled space-time field.

A sample matrix holds field values f_{i/n}(j/n) with one row per time index
and one column per grid point. The left-shift semigroup acts on the grid as
(S(1/n) f)(j/n) = f((j+1)/n), so the semigroup-adjusted increment subtracts
the shifted previous row while the plain increment subtracts it in place:

    adjusted: row i, entry j = samples[i+1][j] - samples[i][j+1]
    plain:    row i, entry j = samples[i+1][j] - samples[i][j]

(1-based indices). Spatial entries run over j = 1..n, dropping the last grid
column. There is one increment row per time step; estimators that skip the
first row do so at their own layer, keeping row 1 available for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix

__all__ = ["ADJUSTED", "PLAIN", "IncrementSet", "adjusted_increments", "plain_increments"]

ADJUSTED = "adjusted"
PLAIN = "plain"


@dataclass(frozen=True)
class IncrementSet:
    """Increment rows plus the construction kind and optional outlier flags."""

    values: np.ndarray
    kind: str
    flags: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (ADJUSTED, PLAIN):
            raise ValueError(f"kind must be {ADJUSTED!r} or {PLAIN!r}, got {self.kind!r}")
        if self.flags is not None and len(self.flags) != self.values.shape[0]:
            raise ValueError("flags length must match the number of increment rows")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_space(self) -> int:
        return self.values.shape[1]


def _check_samples(samples) -> np.ndarray:
    s = as_matrix(samples, "samples")
    if s.shape[0] < 2 or s.shape[1] < 2:
        raise ValueError(f"samples must be at least 2x2, got shape {s.shape}")
    return s


def adjusted_increments(samples) -> IncrementSet:
    """Semigroup-adjusted increments of a sample matrix.

    For a (R+1) x (C+1) input the result has R rows and C columns; the usual
    square case is (n+1) x (n+1) in, n x n out.
    """
    s = _check_samples(samples)
    values = s[1:, :-1] - s[:-1, 1:]
    return IncrementSet(values=values, kind=ADJUSTED)


def plain_increments(samples) -> IncrementSet:
    """Plain time increments of a sample matrix, same shape contract as above."""
    s = _check_samples(samples)
    values = s[1:, :-1] - s[:-1, :-1]
    return IncrementSet(values=values, kind=PLAIN)
