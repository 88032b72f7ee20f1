"""Covariance kernels evaluated on regular spatial grids.

Four kernels are supported:

``laplace``
    k(x, y) = exp(-|x - y|), a rough (Matern-1/2) covariance.
``gauss``
    k(x, y) = exp(-(x - y)^2), a smooth covariance.
``bridge``
    k(x, y) = eta * (min(x, y) - x*y), the Green's function kernel of the
    long-span volatility model on (0, 1).
``one_minus_max``
    k(x, y) = 1 - max(x, y), the functional principal component reference
    kernel on (0, 1).

The formulas are evaluated wherever a grid point lands, including x > 1;
callers that need positive semidefiniteness are responsible for staying on
the kernel's natural domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_square_matrix

__all__ = [
    "KERNEL_NAMES",
    "SpatialGrid",
    "unit_grid",
    "kernel_matrix",
    "mercer_reference",
    "mercer_partial_sum",
]

KERNEL_NAMES = ("laplace", "gauss", "bridge", "one_minus_max")


@dataclass(frozen=True)
class SpatialGrid:
    """Regular grid x_j = j/n for j = 1..width, spacing 1/n.

    ``n`` is the number of points per unit length. ``width`` is the number of
    grid points; simulation grids extend beyond the unit interval (width up
    to 2n+2) while estimation targets use width n.
    """

    n: int
    width: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.width < 2:
            raise ValueError("width must be at least 2")

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.width + 1) / self.n

    @property
    def spacing(self) -> float:
        return 1.0 / self.n


def unit_grid(n: int) -> SpatialGrid:
    """Grid covering the closed unit interval, x_j = j/n for j = 1..n+1."""
    return SpatialGrid(n=n, width=n + 1)


def _kernel_values(kind: str, x: np.ndarray, y: np.ndarray, eta: float) -> np.ndarray:
    if kind == "laplace":
        return np.exp(-np.abs(np.subtract.outer(x, y)))
    if kind == "gauss":
        return np.exp(-np.subtract.outer(x, y) ** 2)
    if kind == "bridge":
        return eta * (np.minimum.outer(x, y) - np.outer(x, y))
    if kind == "one_minus_max":
        return 1.0 - np.maximum.outer(x, y)
    raise ValueError(f"unknown kernel {kind!r}, expected one of {KERNEL_NAMES}")


def kernel_matrix(kind: str, grid: SpatialGrid, scale: float, eta: float = 1.0) -> np.ndarray:
    """Matrix with entries scale * k(x_j, x_j') over all grid points.

    Parameters
    ----------
    kind : str
        One of ``KERNEL_NAMES``.
    grid : SpatialGrid
        Evaluation points.
    scale : float
        Positive multiplier. The per-increment covariance of the simulated
        field uses scale 1/n; estimation targets use scale 1.
    eta : float
        Bridge kernel level, ignored by the other kernels.

    Returns
    -------
    ndarray of shape (width, width), exactly symmetric.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = grid.x
    out = scale * _kernel_values(kind, x, x, eta)
    if not np.isfinite(out).all():
        raise FloatingPointError(f"kernel {kind!r} produced non-finite values")
    # enforce exact symmetry against floating-point asymmetry in outer products
    return (out + out.T) / 2.0


def mercer_reference(kind: str, grid: SpatialGrid, terms: int, eta: float = 1.0):
    """Closed-form kernel matrix together with its analytic eigenvalues.

    For ``one_minus_max`` the eigenpairs on (0, 1) are

        lambda_k = 1 / ((k - 1/2)^2 pi^2),   e_k(x) = sqrt(2) sin((k - 1/2) pi (1 - x)),

    and for ``bridge``

        lambda_k = eta / (k^2 pi^2),         e_k(x) = sqrt(2) sin(k pi x).

    Returns the exact kernel matrix on the grid (scale 1) and the first
    ``terms`` analytic eigenvalues. The truncated Mercer sum
    sum_k lambda_k e_k(x) e_k(y) converges to the returned matrix; tests use
    that as a series oracle.
    """
    if terms < 1:
        raise ValueError("terms must be a positive integer")
    if kind == "one_minus_max":
        k = np.arange(1, terms + 1)
        eigenvalues = 1.0 / ((k - 0.5) ** 2 * np.pi ** 2)
    elif kind == "bridge":
        k = np.arange(1, terms + 1)
        eigenvalues = eta / (k ** 2 * np.pi ** 2)
    else:
        raise ValueError(f"no closed-form eigenvalue sequence for kernel {kind!r}")
    matrix = kernel_matrix(kind, grid, 1.0, eta=eta)
    return matrix, eigenvalues


def mercer_partial_sum(kind: str, grid: SpatialGrid, terms: int, eta: float = 1.0) -> np.ndarray:
    """Truncated eigenfunction expansion of the kernel, for series checks."""
    if terms < 1:
        raise ValueError("terms must be a positive integer")
    x = grid.x
    k = np.arange(1, terms + 1)
    if kind == "one_minus_max":
        lam = 1.0 / ((k - 0.5) ** 2 * np.pi ** 2)
        funcs = np.sqrt(2.0) * np.sin(np.outer(1.0 - x, (k - 0.5) * np.pi))
    elif kind == "bridge":
        lam = eta / (k ** 2 * np.pi ** 2)
        funcs = np.sqrt(2.0) * np.sin(np.outer(x, k * np.pi))
    else:
        raise ValueError(f"no eigenfunction expansion for kernel {kind!r}")
    partial = (funcs * lam) @ funcs.T
    return as_square_matrix((partial + partial.T) / 2.0, "partial sum")
