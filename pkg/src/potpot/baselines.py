"""Reference classifiers for the comparison tables."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numkit import covariance_of, inv_sqrt_psd, sphering
from .potentials import LabeledDataset, PotPotPlot
from .separators import SeparatorKind, _argmax_with_priors, _vote, default_k_max, train_separator


def _pinv_psd(cov: np.ndarray, what: str):
    """Pseudo-inverse and log pseudo-determinant, warning when rank-deficient."""
    root = inv_sqrt_psd(cov)
    if root.rank < cov.shape[0]:
        warnings.warn(f"{what} covariance singular (rank {root.rank}); pseudoinverse used",
                      RuntimeWarning, stacklevel=3)
    return root.root @ root.root, root.log_pdet


@dataclass(frozen=True)
class Bayes:
    """argmax_j p_j f_j with the generator's true densities."""

    priors: np.ndarray
    density: object

    def predict(self, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        scores = np.column_stack([self.priors[j] * self.density(pts, j + 1) for j in range(self.priors.size)])
        return np.argmax(scores, axis=1) + 1


@dataclass(frozen=True)
class GaussianDiscriminant:
    """LDA (shared covariance) or QDA (per-class covariances) with empirical priors."""

    means: np.ndarray
    precisions: tuple[np.ndarray, ...]
    log_dets: tuple[float, ...]
    priors: np.ndarray

    def scores(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((pts.shape[0], self.priors.size))
        for j in range(self.priors.size):
            diff = pts - self.means[j]
            maha = np.einsum("ij,jk,ik->i", diff, self.precisions[j], diff)
            out[:, j] = math.log(self.priors[j]) - 0.5 * self.log_dets[j] - 0.5 * maha
        return out

    def predict(self, points) -> np.ndarray:
        return _argmax_with_priors(self.scores(points), self.priors)


def train_lda(data: LabeledDataset) -> GaussianDiscriminant:
    means = np.array([data.class_points(j).mean(axis=0) for j in range(1, data.q + 1)])
    resid = data.points - means[data.labels - 1]
    pooled = resid.T @ resid / max(data.n - data.q, 1)
    prec, log_det = _pinv_psd(pooled, "pooled")
    q = data.q
    return GaussianDiscriminant(means, (prec,) * q, (log_det,) * q, data.priors())


def train_qda(data: LabeledDataset) -> GaussianDiscriminant:
    means, precs, dets = [], [], []
    for j in range(1, data.q + 1):
        pts = data.class_points(j)
        prec, log_det = _pinv_psd(covariance_of(pts), f"class {j}")
        means.append(pts.mean(axis=0))
        precs.append(prec)
        dets.append(log_det)
    return GaussianDiscriminant(np.array(means), tuple(precs), tuple(dets), data.priors())


@dataclass(frozen=True)
class KnnOriginal:
    """k-NN on jointly sphered data, k chosen by leave-one-out."""

    k: int
    transform: object
    reference: np.ndarray
    labels: np.ndarray
    priors: np.ndarray

    def predict(self, points) -> np.ndarray:
        x = self.transform.apply(np.atleast_2d(points))
        d2 = ((x[:, None, :] - self.reference[None, :, :]) ** 2).sum(axis=2)
        nn = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return _vote(self.labels[nn], self.priors.size, self.priors)[:, -1]


def train_knn_original(data: LabeledDataset, k_max: int | None = None) -> KnnOriginal:
    tr = sphering(data.points)
    ref = tr.apply(data.points)
    k_max = default_k_max(data.n) if k_max is None else min(k_max, data.n - 1)
    d2 = ((ref[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    nn = np.argsort(d2, axis=1, kind="stable")[:, :k_max]
    pred = _vote(data.labels[nn], data.q, data.priors())
    errors = (pred != data.labels[:, None]).sum(axis=0)
    return KnnOriginal(int(np.argmin(errors)) + 1, tr, ref, data.labels, data.priors())


# ---------------------------------------------------------------------------
# depths


def mahalanobis_depth(x, reference) -> np.ndarray:
    """``1 / (1 + (x - mu)' S^+ (x - mu))`` for each row of ``x``."""
    ref = np.asarray(reference, dtype=float)
    prec, _ = _pinv_psd(covariance_of(ref), "reference")
    diff = np.atleast_2d(np.asarray(x, dtype=float)) - ref.mean(axis=0)
    return 1.0 / (1.0 + np.einsum("ij,jk,ik->i", diff, prec, diff))


def spatial_depth(x, reference, chunk: int = 256) -> np.ndarray:
    """``1 - |mean of unit vectors (x - x_i)|`` in the reference's sphered coordinates."""
    ref = np.asarray(reference, dtype=float)
    tr = sphering(ref)
    r = tr.apply(ref)
    xs = tr.apply(np.atleast_2d(np.asarray(x, dtype=float)))
    out = np.empty(xs.shape[0])
    for s in range(0, xs.shape[0], chunk):
        diff = xs[s:s + chunk, None, :] - r[None, :, :]
        norm = np.linalg.norm(diff, axis=2, keepdims=True)
        unit = np.divide(diff, norm, out=np.zeros_like(diff), where=norm > 0)
        out[s:s + chunk] = 1.0 - np.linalg.norm(unit.mean(axis=1), axis=1)
    return out


DEPTHS = {"mahalanobis": mahalanobis_depth, "spatial": spatial_depth}


@dataclass(frozen=True)
class DDClassifier:
    depth: str
    references: tuple[np.ndarray, ...]
    separator: object

    def plot(self, points) -> np.ndarray:
        fn = DEPTHS[self.depth]
        return np.column_stack([fn(points, ref) for ref in self.references])

    def predict(self, points) -> np.ndarray:
        return self.separator.classify(self.plot(points))


def dd_plot_classify(depth: str, kind: SeparatorKind, data: LabeledDataset) -> DDClassifier:
    """Depth of every point w.r.t. every class, then a separator trained on that plot."""
    if depth not in DEPTHS:
        raise ValueError(f"unknown depth {depth!r}")
    refs = tuple(data.class_points(j) for j in range(1, data.q + 1))
    fn = DEPTHS[depth]
    dd = np.column_stack([fn(data.points, ref) for ref in refs])
    sep = train_separator(kind, PotPotPlot(dd, data.labels, data.priors()))
    return DDClassifier(depth, refs, sep)


# ---------------------------------------------------------------------------


BASELINES = ("bayes", "lda", "qda", "knn")


def train_baseline(kind: str, data: LabeledDataset, generated=None, separator: SeparatorKind | None = None):
    """Train one of ``bayes``, ``lda``, ``qda``, ``knn`` or ``dd-<depth>``.

    ``bayes`` needs the :class:`~potpot.datagen.GeneratedSet` the data came
    from; ``dd-*`` uses ``separator`` (diagonal when omitted).
    """
    if kind == "bayes":
        if generated is None:
            raise ValueError("the Bayes baseline needs generated data with known densities")
        return Bayes(np.asarray(generated.priors, dtype=float), generated.true_density)
    if kind == "lda":
        return train_lda(data)
    if kind == "qda":
        return train_qda(data)
    if kind == "knn":
        return train_knn_original(data)
    if kind.startswith("dd-"):
        return dd_plot_classify(kind[3:], separator or SeparatorKind(), data)
    raise ValueError(f"unknown baseline {kind!r}")


@dataclass(frozen=True)
class EfficiencyIndex:
    value: float
    defined: bool = True

    def __float__(self) -> float:
        return self.value


def efficiency_index(err: float, ref_err: float) -> EfficiencyIndex:
    """Error rate relative to a reference error rate."""
    if ref_err == 0:
        if err == 0:
            return EfficiencyIndex(1.0)
        return EfficiencyIndex(math.inf, defined=False)
    return EfficiencyIndex(err / ref_err)
