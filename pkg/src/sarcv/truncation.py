"""Outlier classification of increments.

Two rules are provided besides no truncation at all (``rule=None``):

* ``NormThreshold(c, w)`` flags a row when its Euclidean norm exceeds
  c * delta^w, the textbook threshold for jump-robust realized measures.
* ``MahalanobisRule`` is the data-driven procedure used throughout the
  simulation study:

  1. temporarily set aside the ceil(discard_fraction * rows) largest rows by
     Euclidean norm;
  2. build a preliminary covariation from the remaining rows with the same
     summation convention as the estimators (row 1 skipped, no
     normalization), rescaled by total rows over kept rows;
  3. pick the smallest d whose leading eigenvalues explain ``evr_target`` of
     the preliminary variation;
  4. flag every row, including the set-aside ones, whose Mahalanobis-type
     distance exceeds multiplier * delta^exponent * sqrt(d + 1).

Under Gaussian no-jump dynamics the distance is approximately chi-square
distributed and the default threshold flags well below one percent of
genuine increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DegenerateSpectrumError
from .increments import IncrementSet
from .linalg import EigenPairs, sym_eigen

__all__ = [
    "NormThreshold",
    "MahalanobisRule",
    "TruncationReport",
    "mahalanobis_distance",
    "select_flags",
]

# below this fraction of the top eigenvalue a pooled tail is treated as empty
_TAIL_FLOOR = 1e-14

# minimum rows needed to form a meaningful preliminary covariation
_MIN_ROWS = 8

# estimators skip the first increment row; the preliminary does the same
_PRELIM_START = 1


@dataclass(frozen=True)
class NormThreshold:
    c: float
    w: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0.0 < self.w < 0.5:
            raise ValueError("w must lie in (0, 1/2)")


@dataclass(frozen=True)
class MahalanobisRule:
    discard_fraction: float = 0.25
    evr_target: float = 0.90
    multiplier: float = 3.0
    exponent: float = 0.49

    def __post_init__(self):
        if not 0.0 < self.discard_fraction < 1.0:
            raise ValueError("discard_fraction must lie in (0, 1)")
        if not 0.0 < self.evr_target < 1.0:
            raise ValueError("evr_target must lie in (0, 1)")
        if self.multiplier <= 0:
            raise ValueError("multiplier must be positive")


@dataclass(frozen=True)
class TruncationReport:
    """Flags plus the quantities that produced them."""

    flags: np.ndarray
    d: int
    threshold: float
    prelim_eigen: EigenPairs | None = None

    @property
    def n_flagged(self) -> int:
        return int(self.flags.sum())


def _head_tail_distances(rows: np.ndarray, eig: EigenPairs, d: int) -> np.ndarray:
    """Vectorized g(f) for each row of ``rows``."""
    lam = eig.values
    n = len(lam)
    if not 1 <= d <= n:
        raise ValueError(f"d must lie in 1..{n}, got {d}")
    if lam[d - 1] <= 0:
        raise DegenerateSpectrumError(
            f"eigenvalue {d} of the preliminary covariation is not positive"
        )
    coords = rows @ eig.vectors
    g2 = (coords[:, :d] ** 2 / lam[:d]).sum(axis=1)
    if d < n:
        tail_mass = float(lam[d:].sum())
        if tail_mass > _TAIL_FLOOR * float(lam[0]):
            g2 = g2 + (coords[:, d:] ** 2).sum(axis=1) / tail_mass
    return np.sqrt(g2)


def mahalanobis_distance(increment, eig: EigenPairs, d: int) -> float:
    """Distance g(f) of one increment vector against a reference spectrum.

    g(f)^2 puts the leading d eigendirections on their own scales and pools
    everything beyond them:

        g(f)^2 = sum_{i<=d} <e_i, f>^2 / lambda_i
                 + sum_{i>d} <e_i, f>^2 / sum_{i>d} lambda_i

    The pooled term is dropped when d equals the dimension or the tail
    eigenvalue mass is numerically zero. Raises ``DegenerateSpectrumError``
    when lambda_d <= 0.
    """
    f = np.atleast_2d(np.asarray(increment, dtype=float))
    if f.shape[0] != 1:
        raise ValueError("increment must be a single vector")
    return float(_head_tail_distances(f, eig, d)[0])


def _mahalanobis_report(rows: np.ndarray, rule: MahalanobisRule, delta: float) -> TruncationReport:
    total = rows.shape[0]
    if total < _MIN_ROWS:
        raise ValueError(f"need at least {_MIN_ROWS} increment rows, got {total}")
    norms = np.linalg.norm(rows, axis=1)
    n_discard = math.ceil(rule.discard_fraction * total)
    # stable sort: ties broken by row index ascending
    order = np.argsort(-norms, kind="stable")
    keep = np.ones(total, dtype=bool)
    keep[order[:n_discard]] = False
    prelim_rows = rows[_PRELIM_START:][keep[_PRELIM_START:]]
    if prelim_rows.shape[0] < 1:
        raise DegenerateSpectrumError("no rows left for the preliminary covariation")
    prelim = prelim_rows.T @ prelim_rows
    prelim *= total / prelim_rows.shape[0]
    eig = sym_eigen((prelim + prelim.T) / 2.0)
    lam = np.maximum(eig.values, 0.0)
    mass = float(lam.sum())
    if mass <= 0:
        raise DegenerateSpectrumError("preliminary covariation has no positive eigenvalues")
    d = int(np.argmax(np.cumsum(lam) / mass >= rule.evr_target)) + 1
    threshold = rule.multiplier * delta ** rule.exponent * math.sqrt(d + 1)
    g = _head_tail_distances(rows, eig, d)
    return TruncationReport(flags=g > threshold, d=d, threshold=threshold, prelim_eigen=eig)


def select_flags(increments: IncrementSet, rule, delta: float) -> TruncationReport:
    """Classify every increment row under the given rule.

    ``delta`` is the time-step length (1/n for unit-interval sampling) and is
    always passed explicitly rather than inferred. ``rule=None`` flags
    nothing and reports d = 1 with an infinite threshold.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    rows = increments.values
    if rule is None:
        return TruncationReport(
            flags=np.zeros(rows.shape[0], dtype=bool), d=1, threshold=math.inf
        )
    if isinstance(rule, NormThreshold):
        threshold = rule.c * delta ** rule.w
        flags = np.linalg.norm(rows, axis=1) > threshold
        return TruncationReport(flags=flags, d=1, threshold=threshold)
    if isinstance(rule, MahalanobisRule):
        return _mahalanobis_report(rows, rule, delta)
    raise TypeError(f"unsupported truncation rule {rule!r}")
