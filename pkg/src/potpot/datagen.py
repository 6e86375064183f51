"""Seeded generators for the simulated benchmark families.

Seeds are anything :class:`numpy.random.SeedSequence` accepts.  Replications
draw independent child streams with ``SeedSequence(master).spawn(count)``.

Parameterisation of the normal families: the scale parameter ``s`` (and the
``5`` of the rotation family) is a per-axis standard deviation, so for example
``2scale2`` has ``C2 ~ N((3, 0), diag(1, 4))``.  This is the reading under which
the Bayes risks of the generated families match their reference values
(e.g. ``1rotate9`` has Bayes risk 38%).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln
from scipy.stats import multivariate_normal

from .potentials import LabeledDataset

LOCATION = "dist"
SCALE = "scale"
SCALE_STAR = "scale*"
ROTATION = "rotate"

FAMILY_RANGE = {LOCATION: range(1, 5), SCALE: range(1, 6), SCALE_STAR: range(1, 6), ROTATION: range(1, 10)}
SERIES_SIZES = {1: ((100, 100), (300, 300)), 2: ((1000, 300), (1000, 300))}
DISK_VARIANTS = ((100, 100), (400, 400), (80, 120), (300, 500))
HYPERSPHERE_DIMS = (2, 3, 4, 5, 10)
HYPERSPHERE_SIZES = (50, 100, 250, 500, 1000)


@dataclass(frozen=True)
class NormalSpec:
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class GeneratedSet:
    name: str
    train: LabeledDataset
    test: LabeledDataset
    priors: np.ndarray
    true_density: Callable[[np.ndarray, int], np.ndarray]

    def bayes_labels(self, points) -> np.ndarray:
        """argmax_j p_j f_j(x) with ties to class 1."""
        pts = np.atleast_2d(points)
        scores = np.column_stack([self.priors[j - 1] * self.true_density(pts, j)
                                  for j in range(1, self.priors.size + 1)])
        return np.argmax(scores, axis=1) + 1


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def normal_specs(family: str, index: int) -> tuple[NormalSpec, NormalSpec]:
    """Class distributions of one member of a normal family."""
    if family not in FAMILY_RANGE:
        raise ValueError(f"unknown family {family!r}")
    if index not in FAMILY_RANGE[family]:
        raise ValueError(f"index {index} outside {FAMILY_RANGE[family]} for family {family!r}")
    eye = np.eye(2)
    if family == LOCATION:
        return NormalSpec(np.zeros(2), eye), NormalSpec(np.array([float(index), 0.0]), eye)
    if family == SCALE:
        return NormalSpec(np.zeros(2), eye), NormalSpec(np.array([3.0, 0.0]), np.diag([1.0, index ** 2]))
    if family == SCALE_STAR:
        return NormalSpec(np.zeros(2), eye), NormalSpec(np.array([3.0, 0.0]), np.diag([index ** 2, 1.0]))
    base = np.diag([1.0, 25.0])
    steps = np.linspace(0.0, math.pi / 2, 5)
    a2 = steps[min(index, 5) - 1]
    a1 = steps[index - 5] if index > 5 else 0.0
    r1, r2 = _rotation(a1), _rotation(a2)
    return (NormalSpec(np.zeros(2), r1 @ base @ r1.T),
            NormalSpec(np.array([3.0, 0.0]), r2 @ base @ r2.T))


def _sample_normal(rng, spec: NormalSpec, n: int) -> np.ndarray:
    # Cholesky factor keeps draws reproducible across platforms
    chol = np.linalg.cholesky(spec.covariance)
    return spec.mean + rng.standard_normal((n, 2)) @ chol.T


def _stack(parts) -> LabeledDataset:
    pts = np.vstack(parts)
    lab = np.concatenate([np.full(len(p), j, dtype=int) for j, p in enumerate(parts, start=1)])
    return LabeledDataset(pts, lab)


def gen_normal_series(series: int, family: str, index: int, seed) -> GeneratedSet:
    if series not in SERIES_SIZES:
        raise ValueError("series must be 1 or 2")
    specs = normal_specs(family, index)
    (n1, n2), (m1, m2) = SERIES_SIZES[series]
    rng = _rng(seed)
    train = _stack([_sample_normal(rng, specs[0], n1), _sample_normal(rng, specs[1], n2)])
    test = _stack([_sample_normal(rng, specs[0], m1), _sample_normal(rng, specs[1], m2)])
    dens = [multivariate_normal(s.mean, s.covariance) for s in specs]
    return GeneratedSet(f"{series}{family}{index}", train, test, train.priors(),
                        lambda x, j: dens[j - 1].pdf(np.atleast_2d(x)).reshape(-1))


# ---------------------------------------------------------------------------
# rings and balls


def _log_unit_ball_volume(d: int) -> float:
    return 0.5 * d * math.log(math.pi) - float(gammaln(0.5 * d + 1))


def _uniform_directions(rng, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_rings(rng, rings, n: int, d: int = 2) -> np.ndarray:
    """Uniform points on a union of shells ``r1 < |x| < r2``; shell chosen by volume."""
    vol = np.array([r2 ** d - r1 ** d for r1, r2 in rings], dtype=float)
    which = rng.choice(len(rings), size=n, p=vol / vol.sum())
    lo = np.array([r[0] for r in rings])[which]
    hi = np.array([r[1] for r in rings])[which]
    u = rng.random(n)
    radius = (lo ** d + u * (hi ** d - lo ** d)) ** (1.0 / d)
    return _uniform_directions(rng, n, d) * radius[:, None]


DISK_RINGS = {1: ((0.0, 1.0), (2.0, 3.0)), 2: ((1.0, 2.0), (3.0, 4.0))}


def _ring_density(rings, d: int):
    log_vol = _log_unit_ball_volume(d)
    total = sum(math.exp(log_vol) * (r2 ** d - r1 ** d) for r1, r2 in rings)

    def density(x):
        r = np.linalg.norm(np.atleast_2d(x), axis=1)
        inside = np.zeros(r.shape, dtype=bool)
        for r1, r2 in rings:
            inside |= (r > r1) & (r < r2)
        return inside / total

    return density


def gen_disks(n1: int, n2: int, seed, d: int = 2, test_sizes: tuple[int, int] | None = None) -> GeneratedSet:
    """Nested rings: class 1 on (0,1) and (2,3), class 2 on (1,2) and (3,4)."""
    m1, m2 = test_sizes or (n1, n2)
    rng = _rng(seed)
    r1, r2 = DISK_RINGS[1], DISK_RINGS[2]
    train = _stack([sample_rings(rng, r1, n1, d), sample_rings(rng, r2, n2, d)])
    test = _stack([sample_rings(rng, r1, m1, d), sample_rings(rng, r2, m2, d)])
    dens = [_ring_density(r1, d), _ring_density(r2, d)]
    return GeneratedSet(f"disks_{n1}x{n2}", train, test, train.priors(), lambda x, j: dens[j - 1](x))


def hypersphere_raw_probability(d: int) -> float:
    """P(|X| in (0,1) or (2,3)) for X uniform in the radius-4 ball."""
    return (1 + 3 ** d - 2 ** d) / 4 ** d


def hypersphere_labels(x: np.ndarray, flip: bool = True) -> np.ndarray:
    r = np.linalg.norm(x, axis=1)
    raw = np.where((r < 1) | ((r > 2) & (r < 3)), 1, 2)
    if not flip:
        return raw
    return np.where(x[:, 0] > 0, 3 - raw, raw)


def _ball_sample(rng, n: int, d: int) -> np.ndarray:
    radius = 4.0 * rng.random(n) ** (1.0 / d)
    return _uniform_directions(rng, n, d) * radius[:, None]


@dataclass(frozen=True)
class HypersphereSet(GeneratedSet):
    raw_probability: float = float("nan")
    raw_labels: np.ndarray | None = None


def gen_hyperspheres(d: int, n: int, seed, test_size: int | None = None) -> HypersphereSet:
    """Uniform points in the radius-4 ball, labels alternating by shell and flipped for x_1 > 0."""
    if d not in HYPERSPHERE_DIMS:
        raise ValueError(f"d must be one of {HYPERSPHERE_DIMS}")
    if n not in HYPERSPHERE_SIZES:
        raise ValueError(f"n must be one of {HYPERSPHERE_SIZES}")
    rng = _rng(seed)
    x_tr = _ball_sample(rng, n, d)
    x_te = _ball_sample(rng, test_size or n, d)
    lab_tr = hypersphere_labels(x_tr)
    if np.unique(lab_tr).size < 2:
        raise ValueError("sample too small: only one class drawn")
    train = LabeledDataset(x_tr, lab_tr)
    test = LabeledDataset(x_te, hypersphere_labels(x_te))
    ball_vol = math.exp(_log_unit_ball_volume(d)) * 4.0 ** d

    def density(x, j):
        x = np.atleast_2d(x)
        inside = np.linalg.norm(x, axis=1) < 4
        # both classes have probability 1/2 after the flip
        return np.where(inside & (hypersphere_labels(x) == j), 2.0 / ball_vol, 0.0)

    return HypersphereSet(f"hypersphere_d{d}_n{n}", train, test, np.array([0.5, 0.5]), density,
                          hypersphere_raw_probability(d), hypersphere_labels(x_tr, flip=False))


# ---------------------------------------------------------------------------
# names and replication

_NORMAL_RE = re.compile(r"^([12])(dist|scale\*|scale|rotate)(\d+)$")
_DISK_RE = re.compile(r"^disks_(\d+)x(\d+)$")
_SPHERE_RE = re.compile(r"^hypersphere_d(\d+)_n(\d+)$")


def generator_for(name: str) -> Callable[[object], GeneratedSet]:
    """Map a dataset name (``1dist3``, ``2scale*4``, ``disks_80x120``, ``hypersphere_d3_n250``)
    to a ``seed -> GeneratedSet`` function."""
    m = _NORMAL_RE.match(name)
    if m:
        series, family, idx = int(m.group(1)), m.group(2), int(m.group(3))
        normal_specs(family, idx)
        return lambda seed: gen_normal_series(series, family, idx, seed)
    m = _DISK_RE.match(name)
    if m:
        n1, n2 = int(m.group(1)), int(m.group(2))
        if (n1, n2) not in DISK_VARIANTS:
            raise ValueError(f"disk sizes must be one of {DISK_VARIANTS}")
        return lambda seed: gen_disks(n1, n2, seed)
    m = _SPHERE_RE.match(name)
    if m:
        d, n = int(m.group(1)), int(m.group(2))
        return lambda seed: gen_hyperspheres(d, n, seed)
    raise ValueError(f"unknown generator name {name!r}")


def replication_seeds(master_seed, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master_seed).spawn(count)


def replicate(gen: Callable[[object], GeneratedSet], count: int, stat: Callable[[GeneratedSet], float],
              master_seed=0) -> tuple[float, float]:
    """Mean and sample standard deviation of ``stat`` over ``count`` independent datasets."""
    if count < 2:
        raise ValueError("need at least 2 replications")
    vals = np.array([stat(gen(s)) for s in replication_seeds(master_seed, count)], dtype=float)
    return float(vals.mean()), float(vals.std(ddof=1))
