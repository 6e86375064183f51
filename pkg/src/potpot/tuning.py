"""Bandwidth selection by cross-validated (or held-out) classification error.

Every strategy is a search over :class:`BandwidthConfig` values scored by an
objective.  The default objective is :class:`CvObjective`; a
:class:`HoldoutObjective` scores against a fixed test sample instead.  Both
reuse the sphering and the squared distances of each fold across all
bandwidths they are asked about, which is what makes the 3600-point grid
affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numkit import covariance_of, fit_line
from .potentials import (H2_MAX, H2_MIN, BandwidthConfig, LabeledDataset, PotPotPlot,
                         ScalingMode, class_sq_distances, fit_scaling, log_potential_column)
from .separators import SeparatorKind, train_separator

JOINT = "joint"
SEPARATE = "separate"
REGRESSIVE = "regressive_separate"
ROT = "rot"
EXTREME = "mM"


@dataclass(frozen=True)
class CvProtocol:
    """At most ``max_iterations`` folds of ``m = ceil(n / max_iterations)`` held-out points."""

    max_iterations: int = 200
    fold_seed: int = 0

    def holdout_size(self, n: int) -> int:
        return max(1, math.ceil(n / self.max_iterations))

    def n_folds(self, n: int) -> int:
        return math.ceil(n / self.holdout_size(n))

    def folds(self, data: LabeledDataset) -> list[np.ndarray]:
        """Stratified random partition; every training remainder keeps every class."""
        n = data.n
        m = self.holdout_size(n)
        rng = np.random.default_rng(self.fold_seed)
        keys = np.empty(n)
        for j in range(1, data.q + 1):
            idx = np.flatnonzero(data.labels == j)
            perm = rng.permutation(idx)
            # spread each class evenly over the ordering
            keys[perm] = (np.arange(perm.size) + rng.random()) / perm.size
        order = np.lexsort((data.labels, keys))
        folds = [np.sort(order[s:s + m]) for s in range(0, n, m)]
        sizes = data.class_sizes()
        for f in folds:
            held = np.bincount(data.labels[f], minlength=data.q + 1)[1:]
            if np.any(held >= sizes):
                raise ValueError("a fold would remove an entire class; class too small for "
                                 f"holdout size {m}")
        return folds


@dataclass(frozen=True)
class GridSpec:
    log10_min: float = -3.0
    log10_max: float = 3.0
    count: int = 60

    def log_values(self) -> np.ndarray:
        i = np.arange(self.count)
        return self.log10_min + (self.log10_max - self.log10_min) * i / (self.count - 1)

    def values(self) -> np.ndarray:
        return 10.0 ** self.log_values()


@dataclass
class TuneReport:
    strategy: str
    evaluations: list[tuple[BandwidthConfig, float]]
    best: BandwidthConfig
    best_error: float
    details: dict = field(default_factory=dict)

    def errors(self) -> np.ndarray:
        return np.array([e for _, e in self.evaluations])


# ---------------------------------------------------------------------------
# objectives


class _PlotEngine:
    """Potentials of ``train`` + ``queries`` w.r.t. the classes of ``train``, cached per h^2."""

    def __init__(self, train: LabeledDataset, queries: np.ndarray, scatter=covariance_of):
        self.train = train
        self.queries = np.asarray(queries, dtype=float)
        self.scatter = scatter
        self._pts = np.vstack([train.points, self.queries])
        self._geometry = {}
        self._columns = {}

    def _geo(self, mode: ScalingMode):
        if mode not in self._geometry:
            scaling = fit_scaling(self.train, mode, self.scatter)
            self._geometry[mode] = (scaling, class_sq_distances(scaling, self._pts))
        return self._geometry[mode]

    def plot(self, cfg: BandwidthConfig) -> np.ndarray:
        scaling, sq = self._geo(cfg.mode)
        cols = []
        for j in range(1, scaling.q + 1):
            h2 = cfg.for_class(j)
            key = (cfg.mode, j, h2)
            if key not in self._columns:
                tr = scaling.classes[j - 1].transform
                self._columns[key] = np.exp(log_potential_column(sq[j - 1], h2, scaling.n, tr.rank,
                                                                 tr.log_pdet))
            cols.append(self._columns[key])
        return np.column_stack(cols)

    def misclassified(self, cfg: BandwidthConfig, kind: SeparatorKind, truth: np.ndarray) -> int:
        cfg.check_classes(self.train.q)
        z = self.plot(cfg)
        n_tr = self.train.n
        plot = PotPotPlot(z[:n_tr], self.train.labels, self.train.priors())
        sep = train_separator(kind, plot)
        return int(np.sum(sep.classify(z[n_tr:]) != truth))


class Objective:
    """Maps bandwidth configurations to error rates; counts every evaluation."""

    def __init__(self):
        self.calls = 0

    def errors(self, cfgs: Sequence[BandwidthConfig]) -> np.ndarray:
        cfgs = list(cfgs)
        self.calls += len(cfgs)
        return self._errors(cfgs)

    def __call__(self, cfg: BandwidthConfig) -> float:
        return float(self.errors([cfg])[0])

    def _errors(self, cfgs):
        raise NotImplementedError


class CvObjective(Objective):
    def __init__(self, data: LabeledDataset, kind: SeparatorKind, protocol: CvProtocol = CvProtocol(),
                 scatter=covariance_of):
        super().__init__()
        self.data = data
        self.kind = kind
        self.protocol = protocol
        self.scatter = scatter
        self.folds = protocol.folds(data)

    def _errors(self, cfgs):
        wrong = np.zeros(len(cfgs))
        n = self.data.n
        for held in self.folds:
            keep = np.ones(n, dtype=bool)
            keep[held] = False
            engine = _PlotEngine(self.data.subset(keep), self.data.points[held], self.scatter)
            truth = self.data.labels[held]
            for i, cfg in enumerate(cfgs):
                wrong[i] += engine.misclassified(cfg, self.kind, truth)
        return wrong / n


class HoldoutObjective(Objective):
    """Train on ``train``, score on ``test``; one fit per configuration."""

    def __init__(self, train: LabeledDataset, test: LabeledDataset, kind: SeparatorKind,
                 scatter=covariance_of):
        super().__init__()
        self.test = test
        self.kind = kind
        self.engine = _PlotEngine(train, test.points, scatter)

    def _errors(self, cfgs):
        return np.array([self.engine.misclassified(c, self.kind, self.test.labels) / self.test.n
                         for c in cfgs])


def cv_error(data: LabeledDataset, cfg: BandwidthConfig, kind: SeparatorKind,
             protocol: CvProtocol = CvProtocol()) -> float:
    return CvObjective(data, kind, protocol)(cfg)


# ---------------------------------------------------------------------------
# strategies


def _objective(data, kind, protocol, objective):
    return objective if objective is not None else CvObjective(data, kind, protocol)


def _report(strategy, cfgs, errs, best_index, **details) -> TuneReport:
    evaluations = [(c, float(e)) for c, e in zip(cfgs, errs)]
    return TuneReport(strategy, evaluations, cfgs[best_index], float(errs[best_index]), details)


def tune_joint(data: LabeledDataset, kind: SeparatorKind, grid: GridSpec = GridSpec(),
               protocol: CvProtocol = CvProtocol(), objective: Objective | None = None) -> TuneReport:
    obj = _objective(data, kind, protocol, objective)
    cfgs = [BandwidthConfig.joint(h) for h in grid.values()]
    errs = obj.errors(cfgs)
    return _report(JOINT, cfgs, errs, int(np.argmin(errs)))


def tune_separate(data: LabeledDataset, kind: SeparatorKind, grid: GridSpec = GridSpec(),
                  protocol: CvProtocol = CvProtocol(), objective: Objective | None = None) -> TuneReport:
    if data.q != 2:
        raise ValueError("separate grid tuning is defined for two classes")
    obj = _objective(data, kind, protocol, objective)
    vals = grid.values()
    cfgs = [BandwidthConfig.separate(h1, h2) for h1 in vals for h2 in vals]
    errs = obj.errors(cfgs)
    return _report(SEPARATE, cfgs, errs, int(np.argmin(errs)))


PROBE_CENTERS = (-2.0, -1.0, 0.0, 1.0, 2.0)
PROBE_OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def probe_points() -> list[tuple[float, float]]:
    """25 (log10 h_large^2, log10 h_small^2) probes in five sets across the main diagonal."""
    return [(c + o, c - o) for c in PROBE_CENTERS for o in PROBE_OFFSETS]


def _clamp_log(v: float) -> float:
    return min(max(v, math.log10(H2_MIN)), math.log10(H2_MAX))


def _fit_relation(xs, ys, regression: str):
    """Coefficients (highest power first) of ys ~ poly(xs); linear unless asked otherwise."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if regression != "linear" and np.unique(xs).size >= 3:
        return np.polyfit(xs, ys, 2)
    try:
        a, b = fit_line(xs, ys)
    except ValueError:
        # every minimum sits at the same abscissa: keep the diagonal direction through them
        a, b = float(np.mean(ys - xs)), 1.0
    return np.array([b, a])


def tune_regressive_separate(data: LabeledDataset, kind: SeparatorKind, grid: GridSpec = GridSpec(),
                             protocol: CvProtocol = CvProtocol(), objective: Objective | None = None,
                             regression: str = "linear") -> TuneReport:
    """Probe 25 points, regress the small-class bandwidth on the large-class one, search 60 along it.

    ``regression`` is ``linear`` (default), ``quadratic`` or ``quadratic_inverted``;
    the inverted variant regresses the large-class bandwidth on the small-class
    one and searches over the latter.
    """
    if data.q != 2:
        raise ValueError("regressive separate tuning is defined for two classes")
    if regression not in ("linear", "quadratic", "quadratic_inverted"):
        raise ValueError(f"unknown regression {regression!r}")
    obj = _objective(data, kind, protocol, objective)
    sizes = data.class_sizes()
    large = 1 if sizes[0] >= sizes[1] else 2

    def cfg_of(log_large, log_small):
        h = {large: 10.0 ** log_large, 3 - large: 10.0 ** log_small}
        return BandwidthConfig.separate(h[1], h[2])

    probes = probe_points()
    probe_cfgs = [cfg_of(x, y) for x, y in probes]
    probe_errs = obj.errors(probe_cfgs)

    minima = []
    per = len(PROBE_OFFSETS)
    for s in range(len(PROBE_CENTERS)):
        block = list(range(s * per, (s + 1) * per))
        # ties: closest to the diagonal, then the smaller offset
        best = min(block, key=lambda i: (probe_errs[i], abs(PROBE_OFFSETS[i % per]), PROBE_OFFSETS[i % per]))
        minima.append(probes[best])
    mx = [p[0] for p in minima]
    my = [p[1] for p in minima]

    logs = grid.log_values()
    if regression == "quadratic_inverted":
        coef = _fit_relation(my, mx, regression)
        line = [(_clamp_log(float(np.polyval(coef, v))), float(v)) for v in logs]
    else:
        coef = _fit_relation(mx, my, regression)
        line = [(float(v), _clamp_log(float(np.polyval(coef, v)))) for v in logs]
    line_cfgs = [cfg_of(x, y) for x, y in line]
    line_errs = obj.errors(line_cfgs)

    cfgs = probe_cfgs + line_cfgs
    errs = np.concatenate([probe_errs, line_errs])
    lo = errs.min()
    on_line = np.flatnonzero(line_errs == lo)
    best = len(probe_cfgs) + int(on_line[0]) if on_line.size else int(np.argmin(errs))
    return _report(REGRESSIVE, cfgs, errs, best, larger_class=large, regression=regression,
                   coefficients=[float(c) for c in coef], probe_minima=minima,
                   line_best_error=float(line_errs.min()))


def rot_bandwidth(data: LabeledDataset, mode: ScalingMode) -> BandwidthConfig:
    """Generalized Scott rule ``h^2 = n^(-2/(d+4))`` on sphered data."""
    expo = -2.0 / (data.d + 4)
    if mode is ScalingMode.JOINT:
        return BandwidthConfig.joint(float(data.n) ** expo)
    return BandwidthConfig.separate(*[float(nj) ** expo for nj in data.class_sizes()])


def tune_rot(data: LabeledDataset, kind: SeparatorKind, mode: ScalingMode,
             protocol: CvProtocol = CvProtocol(), objective: Objective | None = None) -> TuneReport:
    obj = _objective(data, kind, protocol, objective)
    cfgs = [rot_bandwidth(data, mode)]
    return _report(ROT, cfgs, obj.errors(cfgs), 0)


def extreme_bandwidth(data: LabeledDataset, kind: SeparatorKind, protocol: CvProtocol = CvProtocol(),
                      mode: ScalingMode = ScalingMode.JOINT,
                      objective: Objective | None = None) -> TuneReport:
    """The better of the two grid ends, 1e-3 and 1e3, shared by all classes."""
    obj = _objective(data, kind, protocol, objective)
    if mode is ScalingMode.JOINT:
        cfgs = [BandwidthConfig.joint(H2_MIN), BandwidthConfig.joint(H2_MAX)]
    else:
        cfgs = [BandwidthConfig.separate(*[h] * data.q) for h in (H2_MIN, H2_MAX)]
    errs = obj.errors(cfgs)
    return _report(EXTREME, cfgs, errs, int(np.argmin(errs)))
