"""Realized covariation estimators built from increment outer products.

The estimators are unnormalized sums over the unit interval,

    sum_{i=start..n} increment_i increment_i^T,

optionally restricted by outlier flags: keeping unflagged rows gives the
downward-truncated (jump-robust) variant, keeping flagged rows the upward
one, and the two always add back up to the untruncated sum. Summation starts
at the second increment row by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix
from .increments import ADJUSTED, IncrementSet, adjusted_increments, plain_increments
from .linalg import sym_eigen
from .truncation import select_flags

__all__ = [
    "KEEP_CHOICES",
    "EstimatorSpec",
    "realized_covariation",
    "long_span_estimate",
    "CovariationEstimator",
]

KEEP_CHOICES = ("all", "small", "large")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which increments to use, which rows to keep, where the sum starts."""

    kind: str = ADJUSTED
    keep: str = "all"
    start_index: int = 2

    def __post_init__(self):
        if self.keep not in KEEP_CHOICES:
            raise ValueError(f"keep must be one of {KEEP_CHOICES}, got {self.keep!r}")
        if self.start_index not in (1, 2):
            raise ValueError("start_index must be 1 or 2")


def realized_covariation(increments: IncrementSet, spec: EstimatorSpec,
                         flags=None) -> np.ndarray:
    """Sum of increment outer products under the given spec.

    ``flags`` marks outlier rows (True = flagged); it is required for the
    truncated variants and may be omitted for ``keep="all"``. Rows before
    ``spec.start_index`` never contribute.
    """
    if spec.kind != increments.kind:
        raise ValueError(
            f"estimator expects {spec.kind!r} increments, got {increments.kind!r}"
        )
    rows = increments.values
    if flags is None:
        flags = increments.flags
    if spec.keep != "all":
        if flags is None:
            raise ValueError(f"keep={spec.keep!r} requires outlier flags")
        flags = np.asarray(flags, dtype=bool)
        if len(flags) != rows.shape[0]:
            raise ValueError("flags length must match the number of increment rows")
    active = rows[spec.start_index - 1:]
    if spec.keep != "all":
        mask = flags[spec.start_index - 1:]
        active = active[~mask] if spec.keep == "small" else active[mask]
    if active.shape[0] == 0:
        n = rows.shape[1]
        return np.zeros((n, n))
    out = active.T @ active
    return (out + out.T) / 2.0


def long_span_estimate(samples, rule, prefactor: float, delta: float | None = None) -> np.ndarray:
    """Normalized downward-truncated covariation over a multi-unit horizon.

    ``samples`` holds T*n + 1 time rows over n + 1 grid columns. Adjusted
    increments are formed over the whole span, flagged under ``rule`` with
    the per-step ``delta`` (defaults to the grid spacing 1/n), and the kept
    rows are summed and scaled by ``prefactor``. The caller chooses the
    prefactor for its target: 1/T for the global covariance of the driver,
    2/T for the inverse drift operator of the stationary volatility model.
    """
    if prefactor <= 0:
        raise ValueError("prefactor must be positive")
    s = as_matrix(samples, "samples")
    n_space = s.shape[1] - 1
    if delta is None:
        delta = 1.0 / n_space
    incs = adjusted_increments(s)
    report = select_flags(incs, rule, delta)
    spec = EstimatorSpec(kind=ADJUSTED, keep="small", start_index=2)
    return prefactor * realized_covariation(incs, spec, report.flags)


class CovariationEstimator(BaseEstimator):
    """Realized covariation of a sampled field, in the fit/attributes style.

    Parameters
    ----------
    increments : {"adjusted", "plain"}, default="adjusted"
        Adjusted increments cancel the transport part of the dynamics and
        target the driver covariation; plain increments leave it in.
    truncation : rule or None, default=None
        ``None``, ``NormThreshold`` or ``MahalanobisRule``. Flags are
        computed from the same increments the estimator sums.
    keep : {"all", "small", "large"}, default="all"
        Which rows enter the sum relative to the outlier flags.
    start_index : {1, 2}, default=2
        First increment row included.
    delta : float or None, default=None
        Time-step length for the truncation threshold; inferred as one over
        the number of spatial increments when omitted.

    Attributes
    ----------
    covariation_ : ndarray of shape (n, n)
        The estimated covariation matrix.
    increments_ : IncrementSet
        Increments the estimate was built from.
    report_ : TruncationReport
        Flags and threshold diagnostics.
    n_steps_ : int
        Number of increment rows.

    Examples
    --------
    >>> import numpy as np
    >>> from sarcv.covariation import CovariationEstimator
    >>> rng = np.random.default_rng(0)
    >>> field = rng.standard_normal((11, 11)).cumsum(axis=0)
    >>> est = CovariationEstimator().fit(field)
    >>> est.covariation_.shape
    (10, 10)
    """

    def __init__(self, increments: str = ADJUSTED, truncation=None, keep: str = "all",
                 start_index: int = 2, delta: float | None = None):
        self.increments = increments
        self.truncation = truncation
        self.keep = keep
        self.start_index = start_index
        self.delta = delta

    def fit(self, X, y=None):
        """Compute the covariation of one sampled field.

        ``X`` is the (n_times + 1) x (n_space + 1) sample matrix; ``y`` is
        ignored and present for interface compatibility.
        """
        X = as_matrix(X, "X")
        if self.increments == ADJUSTED:
            incs = adjusted_increments(X)
        elif self.increments == "plain":
            incs = plain_increments(X)
        else:
            raise ValueError(f"increments must be 'adjusted' or 'plain', got {self.increments!r}")
        delta = self.delta if self.delta is not None else 1.0 / incs.n_space
        report = select_flags(incs, self.truncation, delta)
        spec = EstimatorSpec(kind=incs.kind, keep=self.keep, start_index=self.start_index)
        self.covariation_ = realized_covariation(incs, spec, report.flags)
        self.increments_ = incs
        self.report_ = report
        self.n_steps_ = incs.n_steps
        self.delta_ = delta
        return self

    def eigenpairs(self):
        """Descending spectrum of the fitted covariation."""
        if not hasattr(self, "covariation_"):
            raise NotFittedError("this CovariationEstimator has not been fitted yet")
        return sym_eigen(self.covariation_)
