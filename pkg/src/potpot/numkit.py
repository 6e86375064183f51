"""Small numeric primitives shared by the rest of the package."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EIGEN_TOL = 1e-9


@dataclass(frozen=True)
class InverseRoot:
    """Symmetric (pseudo-)inverse square root of a PSD matrix.

    ``log_pdet`` is the log of the product of the retained eigenvalues, i.e.
    the log pseudo-determinant of the original matrix on its rank-``rank``
    column space.
    """

    root: np.ndarray
    rank: int
    log_pdet: float


@dataclass(frozen=True)
class SpheringTransform:
    center: np.ndarray
    root_inv: np.ndarray
    rank: int
    log_pdet: float

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - self.center) @ self.root_inv.T

    @property
    def dim(self) -> int:
        return self.center.shape[0]


def covariance_of(points) -> np.ndarray:
    """Empirical covariance with divisor n - 1."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 2:
        raise ValueError("degenerate sample: covariance needs at least 2 points")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / (pts.shape[0] - 1)
    return 0.5 * (cov + cov.T)


def inv_sqrt_psd(m, tol: float = EIGEN_TOL) -> InverseRoot:
    """Return Q diag(lam^-1/2) Q^T over the eigenvalues above ``tol * lam_max``.

    Eigenvalues at or below the threshold are dropped, which yields the
    pseudo-inverse root for rank-deficient input.
    """
    mat = np.asarray(m, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    sym = 0.5 * (mat + mat.T)
    lam, q = np.linalg.eigh(sym)
    lam_max = lam.max() if lam.size else 0.0
    if lam_max <= 0.0:
        raise ValueError("zero matrix: no eigenvalue above tolerance")
    keep = lam > tol * lam_max
    qk = q[:, keep]
    root = (qk / np.sqrt(lam[keep])) @ qk.T
    return InverseRoot(root=root, rank=int(keep.sum()), log_pdet=float(np.log(lam[keep]).sum()))


def sphering(points, scatter=covariance_of, center=None, tol: float = EIGEN_TOL) -> SpheringTransform:
    """Fit x -> S^-1/2 (x - mean) on ``points``.

    ``scatter`` is the hook for alternative dispersion estimates; it receives
    the (n, d) sample and must return a symmetric PSD d x d matrix.
    """
    pts = np.asarray(points, dtype=float)
    cov = np.atleast_2d(scatter(pts))
    inv = inv_sqrt_psd(cov, tol)
    mu = pts.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    return SpheringTransform(center=mu, root_inv=inv.root, rank=inv.rank, log_pdet=inv.log_pdet)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def fit_line(xs, ys) -> tuple[float, float]:
    """Ordinary least squares ``y = a + b x``; returns ``(a, b)``."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("fit_line needs at least 2 paired points")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= 1e-300:
        raise ValueError("vertical fit: all x values are equal")
    b = float(xc @ (y - y.mean())) / sxx
    a = float(y.mean() - b * x.mean())
    return a, b
