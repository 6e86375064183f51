"""Kernel potentials of classes and the pot-pot transform.

The potential of class ``j`` at ``x`` is ``p_j * f_j(x)`` where ``f_j`` is a
kernel density estimate with bandwidth matrix ``H_j = h_j^2 * S_j``.  Training
points are sphered once per fit, so evaluating a potential reduces to a sum of
spherical kernels over squared Euclidean distances in sphered coordinates.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

from .numkit import EIGEN_TOL, SpheringTransform, covariance_of, sphering

H2_MIN = 1e-3
H2_MAX = 1e3
_H2_SLACK = 1e-12


class ScalingMode(enum.Enum):
    JOINT = "joint"
    SEPARATE = "separate"


@dataclass(frozen=True)
class LabeledDataset:
    """``n`` points in R^d with integer labels 1..q."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        lab = np.asarray(self.labels)
        if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
            raise ValueError("labels must be a vector with one entry per point")
        if pts.shape[0] == 0:
            raise ValueError("empty dataset")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")
        if not np.all(lab == np.round(lab)):
            raise ValueError("labels must be integers")
        lab = lab.astype(int)
        present = np.unique(lab)
        if present[0] != 1 or not np.array_equal(present, np.arange(1, present[-1] + 1)):
            raise ValueError(f"labels not contiguous from 1: found {present.tolist()}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def q(self) -> int:
        return int(self.labels.max())

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.q + 1)[1:]

    def priors(self) -> np.ndarray:
        return self.class_sizes() / self.n

    def class_points(self, j: int) -> np.ndarray:
        return self.points[self.labels == j]

    def subset(self, index) -> "LabeledDataset":
        return LabeledDataset(self.points[index], self.labels[index])


@dataclass(frozen=True)
class BandwidthConfig:
    """Squared bandwidths: one shared value under joint scaling, one per class otherwise."""

    mode: ScalingMode
    h2: tuple[float, ...]

    def __post_init__(self):
        h2 = tuple(float(v) for v in np.atleast_1d(self.h2))
        if not h2:
            raise ValueError("at least one bandwidth is required")
        if self.mode is ScalingMode.JOINT and len(h2) != 1:
            raise ValueError("joint scaling takes exactly one shared h^2")
        for v in h2:
            if not (H2_MIN * (1 - _H2_SLACK) <= v <= H2_MAX * (1 + _H2_SLACK)):
                raise ValueError(f"h^2 = {v!r} outside [1e-3, 1e3]")
        object.__setattr__(self, "h2", h2)

    @classmethod
    def joint(cls, h2: float) -> "BandwidthConfig":
        return cls(ScalingMode.JOINT, (h2,))

    @classmethod
    def separate(cls, *h2: float) -> "BandwidthConfig":
        return cls(ScalingMode.SEPARATE, tuple(h2))

    def for_class(self, j: int) -> float:
        """Squared bandwidth of class ``j`` (1-based)."""
        return self.h2[0] if self.mode is ScalingMode.JOINT else self.h2[j - 1]

    def check_classes(self, q: int) -> None:
        if self.mode is ScalingMode.SEPARATE and len(self.h2) != q:
            raise ValueError(f"separate scaling needs {q} bandwidths, got {len(self.h2)}")


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class SphericalKernel:
    """``K(z) = r(z'z)`` given through its log profile ``log r(t)`` in dimension ``dim``."""

    name: str
    log_profile: Callable[[np.ndarray, int], np.ndarray]

    def __call__(self, u) -> float:
        z = np.atleast_1d(np.asarray(u, dtype=float))
        return float(np.exp(self.log_profile(np.asarray(z @ z), z.shape[0])))


def _gaussian_log_profile(t, dim: int):
    return -0.5 * dim * math.log(2 * math.pi) - 0.5 * np.asarray(t, dtype=float)


GAUSSIAN = SphericalKernel("gaussian", _gaussian_log_profile)


def gaussian_kernel(u) -> float:
    """Standard normal density ``(2 pi)^(-d/2) exp(-u'u/2)``."""
    return GAUSSIAN(u)


# ---------------------------------------------------------------------------
# scaling (bandwidth independent part of a fit)


@dataclass(frozen=True)
class ClassScaling:
    transform: SpheringTransform
    train: np.ndarray  # class points in sphered coordinates


@dataclass(frozen=True)
class Scaling:
    mode: ScalingMode
    n: int
    d: int
    priors: np.ndarray
    classes: tuple[ClassScaling, ...]
    notes: tuple[str, ...] = ()

    @property
    def q(self) -> int:
        return len(self.classes)


def fit_scaling(data: LabeledDataset, mode: ScalingMode, scatter=covariance_of,
                tol: float = EIGEN_TOL) -> Scaling:
    """Sphere the data jointly (pooled mean and covariance) or per class."""
    notes = []
    classes = []
    if mode is ScalingMode.JOINT:
        tr = sphering(data.points, scatter, tol=tol)
        if tr.rank < data.d:
            notes.append(f"pooled covariance singular (rank {tr.rank} < {data.d}); pseudoinverse used")
        for j in range(1, data.q + 1):
            classes.append(ClassScaling(tr, tr.apply(data.class_points(j))))
    else:
        for j in range(1, data.q + 1):
            pts = data.class_points(j)
            tr = sphering(pts, scatter, tol=tol)
            if tr.rank < data.d:
                notes.append(f"class {j} covariance singular (rank {tr.rank} < {data.d}); "
                             "pseudoinverse used")
            classes.append(ClassScaling(tr, tr.apply(pts)))
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
    return Scaling(mode, data.n, data.d, data.priors(), tuple(classes), tuple(notes))


def class_sq_distances(scaling: Scaling, points) -> list[np.ndarray]:
    """Squared distances in each class's sphered coordinates, one (m, n_j) block per class."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != scaling.d:
        raise ValueError(f"dimension mismatch: model has d={scaling.d}, points have {pts.shape[1]}")
    out = []
    shared = None
    for cs in scaling.classes:
        if scaling.mode is ScalingMode.JOINT:
            if shared is None:
                shared = cs.transform.apply(pts)
            q_pts = shared
        else:
            q_pts = cs.transform.apply(pts)
        out.append(cdist(q_pts, cs.train, "sqeuclidean"))
    return out


def log_potential_column(sq: np.ndarray, h2: float, n_total: int, rank: int, log_pdet: float,
                         kernel: SphericalKernel = GAUSSIAN) -> np.ndarray:
    """log of ``(1/n) sum_i |H|^-1/2 K(H^-1/2 (x - x_i))`` for ``H = h2 * S`` (rank ``rank``)."""
    log_k = kernel.log_profile(sq / h2, rank)
    log_det_h = rank * math.log(h2) + log_pdet
    return logsumexp(log_k, axis=1) - 0.5 * log_det_h - math.log(n_total)


# ---------------------------------------------------------------------------
# fitted model


@dataclass(frozen=True)
class PotentialModel:
    scaling: Scaling
    config: BandwidthConfig
    kernel: SphericalKernel = GAUSSIAN

    @property
    def n(self) -> int:
        return self.scaling.n

    @property
    def d(self) -> int:
        return self.scaling.d

    @property
    def q(self) -> int:
        return self.scaling.q

    @property
    def priors(self) -> np.ndarray:
        return self.scaling.priors

    @property
    def notes(self) -> tuple[str, ...]:
        return self.scaling.notes

    def log_potentials(self, points) -> np.ndarray:
        sq = class_sq_distances(self.scaling, points)
        cols = []
        for j, (cs, block) in enumerate(zip(self.scaling.classes, sq), start=1):
            tr = cs.transform
            cols.append(log_potential_column(block, self.config.for_class(j), self.n,
                                             tr.rank, tr.log_pdet, self.kernel))
        return np.column_stack(cols)


def fit_potential_model(data: LabeledDataset, cfg: BandwidthConfig, kernel: SphericalKernel = GAUSSIAN,
                        scatter=covariance_of) -> PotentialModel:
    cfg.check_classes(data.q)
    return PotentialModel(fit_scaling(data, cfg.mode, scatter), cfg, kernel)


def potential_at(model: PotentialModel, x, j: int) -> float:
    """Potential of class ``j`` (1-based) at the single point ``x``."""
    if not 1 <= j <= model.q:
        raise IndexError(f"class index {j} out of range 1..{model.q}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.exp(model.log_potentials(x[None, :])[0, j - 1]))


def pot_pot_transform(model: PotentialModel, points) -> np.ndarray:
    """Rows of potentials, one column per class; underflow below exp(-745) gives 0."""
    return np.exp(model.log_potentials(points))


@dataclass(frozen=True)
class PotPotPlot:
    z: np.ndarray
    labels: np.ndarray
    priors: np.ndarray = field(default=None)

    def __post_init__(self):
        z = np.atleast_2d(np.asarray(self.z, dtype=float))
        lab = np.asarray(self.labels).astype(int)
        if z.shape[0] != lab.shape[0]:
            raise ValueError("one label per plot row required")
        if np.any(z < 0):
            raise ValueError("potentials must be nonnegative")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "labels", lab)
        if self.priors is None:
            counts = np.bincount(lab, minlength=z.shape[1] + 1)[1:z.shape[1] + 1]
            object.__setattr__(self, "priors", counts / max(lab.shape[0], 1))

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def q(self) -> int:
        return self.z.shape[1]


def pot_pot_plot(model: PotentialModel, data: LabeledDataset) -> PotPotPlot:
    return PotPotPlot(pot_pot_transform(model, data.points), data.labels)
