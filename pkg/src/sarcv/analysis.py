"""Error metrics, principal component diagnostics, and rate regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import as_matrix, as_square_matrix
from .covariation import CovariationEstimator
from .linalg import frobenius_distance, sym_eigen

__all__ = [
    "rel_err",
    "d_explained",
    "fpca_basis",
    "RateFit",
    "fit_power_law",
    "DriverFPCA",
]


def rel_err(estimate, truth) -> float:
    """Relative Frobenius error ||estimate - truth|| / ||truth||."""
    truth = as_square_matrix(truth, "truth")
    denom = float(np.linalg.norm(truth))
    if denom == 0.0:
        raise ValueError("truth matrix must be nonzero")
    return frobenius_distance(estimate, truth) / denom


def d_explained(eigenvalues, target: float, total: float | None = None) -> int:
    """Smallest d whose leading eigenvalues reach the target mass fraction.

    Negative eigenvalues are clipped to zero before computing fractions. The
    denominator defaults to the sum of the clipped input; passing ``total``
    overrides it, which matters for truncated analytic spectra whose full
    trace is known in closed form.
    """
    lam = np.asarray(getattr(eigenvalues, "values", eigenvalues), dtype=float)
    if lam.ndim != 1 or len(lam) == 0:
        raise ValueError("eigenvalues must be a non-empty 1-d sequence")
    if not 0.0 < target <= 1.0:
        raise ValueError("target must lie in (0, 1]")
    lam = np.maximum(lam, 0.0)
    mass = float(lam.sum()) if total is None else float(total)
    if mass <= 0.0:
        raise ValueError("spectrum has no positive mass")
    fractions = np.cumsum(np.sort(lam)[::-1]) / mass
    reached = np.nonzero(fractions >= target)[0]
    if len(reached) == 0:
        raise ValueError(f"spectrum never reaches the target fraction {target}")
    return int(reached[0]) + 1


def fpca_basis(cov, d: int):
    """Top-d principal directions of a covariance matrix.

    Returns ``(basis, captured_fraction, tail_trace)`` where basis has the d
    leading eigenvectors as columns, captured_fraction is their share of the
    clipped eigenvalue mass, and tail_trace is the remaining mass, which is
    the mean squared error per unit time of projecting the driver onto the
    basis.
    """
    cov = as_square_matrix(cov, "cov")
    if not 1 <= d <= cov.shape[0]:
        raise ValueError(f"d must lie in 1..{cov.shape[0]}, got {d}")
    eig = sym_eigen(cov)
    lam = np.maximum(eig.values, 0.0)
    mass = float(lam.sum())
    if mass <= 0.0:
        raise ValueError("covariance has no positive eigenvalue mass")
    captured = float(lam[:d].sum()) / mass
    tail = float(lam[d:].sum())
    return eig.vectors[:, :d].copy(), captured, tail


@dataclass(frozen=True)
class RateFit:
    """Median errors per grid size and the fitted log-log slope against delta."""

    grid_sizes: tuple
    median_errors: tuple
    slope: float
    intercept: float


def fit_power_law(grid_sizes, median_errors) -> RateFit:
    """Least-squares slope of log(error) against log(delta = 1/n).

    A positive slope means the error shrinks as the grid refines; an exact
    power law err = C * delta^p is recovered with slope p up to rounding.
    """
    sizes = np.asarray(grid_sizes, dtype=float)
    errors = np.asarray(median_errors, dtype=float)
    if len(sizes) != len(errors):
        raise ValueError("grid_sizes and median_errors must have equal length")
    if len(sizes) < 3:
        raise ValueError("need at least 3 grid sizes for a rate fit")
    if np.any(sizes <= 0) or np.any(errors <= 0):
        raise ValueError("grid sizes and errors must be positive")
    if np.any(np.diff(sizes) <= 0):
        raise ValueError("grid_sizes must be strictly ascending")
    slope, intercept = np.polyfit(np.log(1.0 / sizes), np.log(errors), 1)
    return RateFit(
        grid_sizes=tuple(int(s) for s in sizes),
        median_errors=tuple(float(e) for e in errors),
        slope=float(slope),
        intercept=float(intercept),
    )


class DriverFPCA(BaseEstimator, TransformerMixin):
    """Principal component analysis of the driver covariation.

    Fits a realized covariation to a sampled field and eigendecomposes it,
    yielding a basis for dimension reduction that is dynamically consistent:
    with adjusted increments the components estimate the driver's
    eigenfunctions rather than mixing in transport effects.

    Parameters
    ----------
    n_components : int, float or None, default=None
        Number of components to keep. A float in (0, 1) selects the smallest
        dimension whose explained variance fraction reaches it; None keeps
        everything.
    increments, truncation, keep, start_index, delta
        Passed through to :class:`CovariationEstimator`.

    Attributes
    ----------
    components_ : ndarray of shape (d, n)
        Principal directions, one per row.
    eigenvalues_ : ndarray
        Full descending spectrum of the fitted covariation.
    explained_variance_ratio_ : ndarray
        Per-component share of the clipped eigenvalue mass.
    captured_fraction_ : float
        Total share captured by the kept components.
    tail_trace_ : float
        Eigenvalue mass left out, the projection MSE per unit time.
    """

    def __init__(self, n_components=None, increments: str = "adjusted", truncation=None,
                 keep: str = "all", start_index: int = 2, delta: float | None = None):
        self.n_components = n_components
        self.increments = increments
        self.truncation = truncation
        self.keep = keep
        self.start_index = start_index
        self.delta = delta

    def fit(self, X, y=None):
        est = CovariationEstimator(
            increments=self.increments, truncation=self.truncation, keep=self.keep,
            start_index=self.start_index, delta=self.delta,
        ).fit(X)
        eig = sym_eigen(est.covariation_)
        lam = np.maximum(eig.values, 0.0)
        mass = float(lam.sum())
        if mass <= 0.0:
            raise ValueError("fitted covariation has no positive eigenvalue mass")
        n = len(lam)
        if self.n_components is None:
            d = n
        elif isinstance(self.n_components, float):
            if not 0.0 < self.n_components < 1.0:
                raise ValueError("fractional n_components must lie in (0, 1)")
            d = d_explained(lam, self.n_components)
        else:
            d = int(self.n_components)
            if not 1 <= d <= n:
                raise ValueError(f"n_components must lie in 1..{n}, got {d}")
        self.covariation_ = est.covariation_
        self.eigenvalues_ = eig.values
        self.components_ = eig.vectors[:, :d].T.copy()
        self.explained_variance_ratio_ = lam[:d] / mass
        self.captured_fraction_ = float(lam[:d].sum() / mass)
        self.tail_trace_ = float(lam[d:].sum())
        self.n_components_ = d
        return self

    def transform(self, X):
        """Project vectors over the spatial grid onto the fitted components."""
        if not hasattr(self, "components_"):
            raise NotFittedError("this DriverFPCA has not been fitted yet")
        X = as_matrix(X, "X")
        if X.shape[1] != self.components_.shape[1]:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.components_.shape[1]}"
            )
        return X @ self.components_.T
