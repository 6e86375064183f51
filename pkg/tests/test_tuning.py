import math

import numpy as np
import pytest

from potpot.datagen import gen_normal_series, replication_seeds
from potpot.potentials import BandwidthConfig, LabeledDataset, ScalingMode
from potpot.separators import SeparatorKind
from potpot.tuning import (_fit_relation, CvObjective, CvProtocol, GridSpec, HoldoutObjective, Objective, cv_error,
                           extreme_bandwidth, probe_points, rot_bandwidth, tune_joint,
                           tune_regressive_separate, tune_rot, tune_separate)

DIAG = SeparatorKind("diagonal")


class ConstantObjective(Objective):
    def __init__(self, value=0.25):
        super().__init__()
        self.value = value

    def _errors(self, cfgs):
        return np.full(len(cfgs), self.value)


class BowlObjective(Objective):
    """Error minimal at log10 h1^2 = c1, log10 h2^2 = c2 (distances on the log grid)."""

    def __init__(self, c1, c2):
        super().__init__()
        self.c = (c1, c2)

    def _errors(self, cfgs):
        out = []
        for cfg in cfgs:
            l1, l2 = (math.log10(cfg.for_class(j)) for j in (1, 2))
            out.append(0.1 + 0.01 * ((l1 - self.c[0]) ** 2 + (l2 - self.c[1]) ** 2))
        return np.array(out)


def small(rng, n1=20, n2=20, gap=1.5):
    pts = np.vstack([rng.normal(size=(n1, 2)), rng.normal(size=(n2, 2)) + [gap, 0]])
    return LabeledDataset(pts, np.repeat([1, 2], [n1, n2]))


def test_grid_formula():
    vals = GridSpec().values()
    assert vals.size == 60
    for i in (0, 17, 59):
        assert vals[i] == pytest.approx(10 ** (-3 + 6 * i / 59), rel=1e-14)
    assert vals[0] == pytest.approx(1e-3) and vals[-1] == pytest.approx(1e3)


@pytest.mark.parametrize("n, m, folds", [(100, 1, 100), (748, 4, 187), (200, 1, 200), (401, 3, 134)])
def test_fold_sizes(n, m, folds):
    p = CvProtocol()
    assert p.holdout_size(n) == m
    assert p.n_folds(n) == folds


def test_folds_partition_and_keep_classes(rng):
    data = small(rng, 30, 11)
    folds = CvProtocol(max_iterations=8).folds(data)
    allidx = np.sort(np.concatenate(folds))
    assert allidx.tolist() == list(range(data.n))
    for f in folds:
        rest = np.setdiff1d(np.arange(data.n), f)
        assert set(data.labels[rest]) == {1, 2}


def test_folds_reject_tiny_class():
    data = LabeledDataset(np.arange(12.0)[:, None], np.array([1] * 11 + [2]))
    with pytest.raises(ValueError, match="entire class"):
        CvProtocol().folds(data)


def test_budgets(rng):
    data = small(rng)
    for tuner, count in ((tune_joint, 60), (tune_separate, 3600), (tune_regressive_separate, 85)):
        obj = ConstantObjective()
        report = tuner(data, DIAG, objective=obj)
        assert obj.calls == count == len(report.evaluations)
    obj = ConstantObjective()
    assert len(extreme_bandwidth(data, DIAG, objective=obj).evaluations) == 2 == obj.calls
    obj = ConstantObjective()
    assert len(tune_rot(data, DIAG, ScalingMode.JOINT, objective=obj).evaluations) == 1 == obj.calls


def test_flat_error_picks_smallest(rng):
    data = small(rng)
    rep = tune_joint(data, DIAG, objective=ConstantObjective())
    assert rep.best.h2[0] == pytest.approx(1e-3)
    rep = tune_separate(data, DIAG, objective=ConstantObjective())
    assert rep.best.h2 == pytest.approx((1e-3, 1e-3))
    rep = extreme_bandwidth(data, DIAG, objective=ConstantObjective())
    assert rep.best.h2[0] == pytest.approx(1e-3)


def test_separate_requires_two_classes(rng):
    pts = rng.normal(size=(30, 2))
    data = LabeledDataset(pts, np.repeat([1, 2, 3], 10))
    with pytest.raises(ValueError):
        tune_separate(data, DIAG, objective=ConstantObjective())
    with pytest.raises(ValueError):
        tune_regressive_separate(data, DIAG, objective=ConstantObjective())


def test_regressive_probe_pattern_and_line(rng):
    data = small(rng, 25, 15)
    rep = tune_regressive_separate(data, DIAG, objective=BowlObjective(0.5, -0.5))
    assert rep.details["larger_class"] == 1
    for (cfg, _), (x, y) in zip(rep.evaluations[:25], probe_points()):
        assert math.log10(cfg.h2[0]) == pytest.approx(x)
        assert math.log10(cfg.h2[1]) == pytest.approx(y)
    assert probe_points()[:5] == [(-3.0, -1.0), (-2.5, -1.5), (-2.0, -2.0), (-1.5, -2.5), (-1.0, -3.0)]
    # the bowl's anti-diagonal minima lie on y = x - 1
    a, b = rep.details["coefficients"][1], rep.details["coefficients"][0]
    assert b == pytest.approx(1.0) and a == pytest.approx(-1.0)
    assert rep.best_error == min(e for _, e in rep.evaluations)


def test_regressive_larger_class_is_first_axis(rng):
    data = small(rng, 10, 30)
    rep = tune_regressive_separate(data, DIAG, objective=BowlObjective(0.0, 0.0))
    assert rep.details["larger_class"] == 2
    first = rep.evaluations[0][0]
    # probe (-3, -1) is (log h_large, log h_small): class 2 gets 1e-3
    assert first.h2 == pytest.approx((1e-1, 1e-3))


def test_vertical_fit_falls_back_to_diagonal_direction():
    # unreachable with the default probes (no abscissa is shared by all five
    # sets) but kept for custom probe layouts
    coef = _fit_relation([0.5] * 5, [0.1, 0.2, 0.3, 0.4, 0.5], "linear")
    assert coef.tolist() == pytest.approx([1.0, -0.2])


@pytest.mark.parametrize("reg", ["quadratic", "quadratic_inverted"])
def test_regressive_variants(rng, reg):
    rep = tune_regressive_separate(small(rng), DIAG, objective=BowlObjective(0.3, 0.1), regression=reg)
    assert len(rep.evaluations) == 85


def test_rot_values():
    rng = np.random.default_rng(0)
    d100 = LabeledDataset(rng.normal(size=(100, 2)), np.repeat([1, 2], 50))
    assert rot_bandwidth(d100, ScalingMode.JOINT).h2[0] == pytest.approx(0.21544, abs=1e-5)
    d1000 = LabeledDataset(rng.normal(size=(1300, 2)), np.repeat([1, 2], [1000, 300]))
    cfg = rot_bandwidth(d1000, ScalingMode.SEPARATE)
    assert cfg.h2 == pytest.approx((0.1, 0.14938), abs=1e-5)
    d1000j = LabeledDataset(rng.normal(size=(1000, 2)), np.repeat([1, 2], 500))
    assert rot_bandwidth(d1000j, ScalingMode.JOINT).h2[0] == pytest.approx(0.1, rel=1e-12)


def test_far_apart_classes_zero_error(rng):
    data = small(rng, 20, 20, gap=40.0)
    proto = CvProtocol(max_iterations=10)
    assert cv_error(data, BandwidthConfig.joint(1.0), DIAG, proto) == 0
    rep = extreme_bandwidth(data, DIAG, proto)
    assert rep.errors().tolist() == [0.0, 0.0]
    assert rep.best.h2[0] == pytest.approx(1e-3)
    # held-out points far from all training points sit near the plot origin
    # at the smallest bandwidth, so k-NN there is only nearly perfect
    rep = extreme_bandwidth(data, SeparatorKind("knn"), proto)
    assert rep.errors().max() <= 0.05


def test_cv_objective_matches_direct_refit(rng):
    from potpot.classifier import PotPotClassifier

    data = small(rng, 15, 12)
    proto = CvProtocol(max_iterations=6, fold_seed=3)
    for kind in (DIAG, SeparatorKind("knn"), SeparatorKind("alpha")):
        cfg = BandwidthConfig.separate(0.4, 1.3)
        wrong = 0
        for held in proto.folds(data):
            keep = np.setdiff1d(np.arange(data.n), held)
            clf = PotPotClassifier.fit(data.subset(keep), cfg, kind)
            wrong += int(np.sum(clf.predict(data.points[held]) != data.labels[held]))
        assert CvObjective(data, kind, proto)(cfg) == pytest.approx(wrong / data.n)


def test_holdout_objective_matches_refit(rng):
    from potpot.classifier import PotPotClassifier

    train, test = small(rng), small(rng)
    cfg = BandwidthConfig.joint(0.5)
    for kind in (DIAG, SeparatorKind("knn")):
        assert HoldoutObjective(train, test, kind)(cfg) == pytest.approx(
            PotPotClassifier.fit(train, cfg, kind).error_rate(test))


def test_separate_surface_symmetric_for_mirror_classes():
    rng = np.random.default_rng(2)
    left = rng.normal(size=(40, 2)) + [-1.2, 0]
    test_left = rng.normal(size=(200, 2)) + [-1.2, 0]
    mirror = np.array([-1.0, 1.0])
    train = LabeledDataset(np.vstack([left, left * mirror]), np.repeat([1, 2], 40))
    test = LabeledDataset(np.vstack([test_left, test_left * mirror]), np.repeat([1, 2], 200))
    grid = GridSpec(-2, 2, 9)
    rep = tune_separate(train, DIAG, grid, objective=HoldoutObjective(train, test, DIAG))
    surf = rep.errors().reshape(9, 9)
    assert np.abs(surf - surf.T).max() <= 0.02


def test_separate_no_worse_than_joint_and_regressive_close():
    gs = gen_normal_series(1, "dist", 3, 11)
    obj = lambda: HoldoutObjective(gs.train, gs.test, DIAG)  # noqa: E731
    joint = tune_joint(gs.train, DIAG, objective=obj())
    sep = tune_separate(gs.train, DIAG, objective=obj())
    reg = tune_regressive_separate(gs.train, DIAG, objective=obj())
    assert sep.best_error <= joint.best_error + 0.01
    assert abs(reg.best_error - sep.best_error) <= 0.02


def test_regression_line_near_identity_for_symmetric_classes():
    slopes = []
    for seed in replication_seeds(0, 40):
        gs = gen_normal_series(1, "dist", 3, seed)
        rep = tune_regressive_separate(gs.train, DIAG, objective=HoldoutObjective(gs.train, gs.test, DIAG))
        slopes.append(rep.details["coefficients"][0])
    assert abs(np.mean(slopes) - 1.0) < 0.3
