"""Symmetric eigendecomposition and positive semidefinite Cholesky factors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import NumericError, as_square_matrix, check_symmetric

__all__ = ["EigenPairs", "sym_eigen", "cholesky_psd", "frobenius_distance"]

# escalation rungs, multiplied by trace/size to set the absolute diagonal lift
_JITTER_LADDER = (0.0, 1e-14, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues in descending order with eigenvectors as matching columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)


def sym_eigen(m, clip_tol: float = 1e-10) -> EigenPairs:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order. Small negative eigenvalues
    produced by rounding on a positive semidefinite input, those within
    ``clip_tol * lambda_max`` of zero, are clipped to 0. Each eigenvector is
    sign-fixed so its largest-magnitude component is positive, which makes
    decompositions reproducible across platforms.
    """
    m = as_square_matrix(m, "m")
    check_symmetric(m, name="m")
    values, vectors = np.linalg.eigh(m)
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    lam_max = float(values[0]) if len(values) else 0.0
    if lam_max > 0:
        near_zero = (values < 0) & (values >= -clip_tol * lam_max)
        values[near_zero] = 0.0
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            vectors[:, j] = -col
    return EigenPairs(values=values, vectors=vectors)


def cholesky_psd(m, jitter: float = 0.0) -> np.ndarray:
    """Lower-triangular L with L @ L.T == m + jitter * I.

    Positive semidefinite inputs that fail a plain Cholesky factorization are
    retried with an escalating diagonal lift up to 1e-8 * trace/size. The
    all-zero matrix factors to zero. Raises ``NumericError`` with the last
    attempted jitter if every attempt fails.
    """
    m = as_square_matrix(m, "m")
    check_symmetric(m, name="m")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    size = m.shape[0]
    if not m.any():
        return np.zeros_like(m)
    base = float(np.trace(m)) / size
    attempts = [jitter]
    for rung in _JITTER_LADDER[1:]:
        lift = rung * abs(base)
        if lift > jitter:
            attempts.append(lift)
    eye = np.eye(size)
    attempted = jitter
    for attempted in attempts:
        try:
            return np.linalg.cholesky(m + attempted * eye)
        except np.linalg.LinAlgError:
            continue
    raise NumericError(
        f"Cholesky factorization failed for size {size} after jitter escalation "
        f"up to {attempted:.3e}"
    )


def frobenius_distance(a, b) -> float:
    """Frobenius norm of a - b."""
    a = as_square_matrix(a, "a")
    b = as_square_matrix(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
