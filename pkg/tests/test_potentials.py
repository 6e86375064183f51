import math
import warnings

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given
from hypothesis import strategies as st

from potpot.bench.acceptance import oracle_potential, random_configuration
from potpot.numkit import covariance_of
from potpot.potentials import (BandwidthConfig, LabeledDataset, ScalingMode, fit_potential_model,
                               gaussian_kernel, pot_pot_plot, pot_pot_transform, potential_at)


def two_class(rng, n1=60, n2=40):
    pts = np.vstack([rng.normal(size=(n1, 2)), rng.normal(size=(n2, 2)) * [1, 2] + [2, 0]])
    return LabeledDataset(pts, np.repeat([1, 2], [n1, n2]))


def test_gaussian_kernel_values():
    assert gaussian_kernel([0.0]) == pytest.approx(0.398942, abs=1e-6)
    assert gaussian_kernel([0.0, 0.0]) == pytest.approx(0.159155, abs=1e-6)
    assert gaussian_kernel([1.0, 1.0]) == pytest.approx(math.exp(-1) / (2 * math.pi), abs=1e-6)


def test_priors(rng):
    model = fit_potential_model(two_class(rng), BandwidthConfig.joint(1.0))
    np.testing.assert_allclose(model.priors, [0.6, 0.4])


def test_separate_mode_sphere_per_class(rng):
    data = two_class(rng)
    model = fit_potential_model(data, BandwidthConfig.separate(1.0, 1.0))
    for cs in model.scaling.classes:
        np.testing.assert_allclose(covariance_of(cs.train), np.eye(2), atol=1e-6)


def test_joint_mode_shares_one_transform(rng):
    model = fit_potential_model(two_class(rng), BandwidthConfig.joint(0.5))
    a, b = model.scaling.classes
    assert a.transform is b.transform


def test_single_point_class():
    data = LabeledDataset(np.array([[0.3]]), np.array([1]))
    model = fit_potential_model(data, BandwidthConfig.joint(1.0), scatter=lambda p: np.eye(1))
    assert potential_at(model, [0.3], 1) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-12)
    assert potential_at(model, [1.3], 1) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-12)


def test_class_index_range(rng):
    model = fit_potential_model(two_class(rng), BandwidthConfig.joint(1.0))
    with pytest.raises(IndexError):
        potential_at(model, [0, 0], 3)
    with pytest.raises(IndexError):
        potential_at(model, [0, 0], 0)


def test_dimension_mismatch(rng):
    model = fit_potential_model(two_class(rng), BandwidthConfig.joint(1.0))
    with pytest.raises(ValueError, match="dimension mismatch"):
        pot_pot_transform(model, np.zeros((3, 3)))


@pytest.mark.parametrize("h2", [1e-4, 2e3])
def test_bandwidth_bounds(h2):
    with pytest.raises(ValueError):
        BandwidthConfig.joint(h2)


def test_separate_needs_one_bandwidth_per_class(rng):
    with pytest.raises(ValueError):
        fit_potential_model(two_class(rng), BandwidthConfig.separate(1.0))


def test_mirror_symmetry():
    rng = np.random.default_rng(3)
    left = rng.normal(size=(30, 2)) + [-2, 0]
    right = left * [-1, 1]
    data = LabeledDataset(np.vstack([left, right]), np.repeat([1, 2], 30))
    for cfg in (BandwidthConfig.joint(0.5), BandwidthConfig.separate(0.5, 0.5)):
        z = pot_pot_transform(fit_potential_model(data, cfg), [[0.0, 0.7]])
        assert z[0, 0] == pytest.approx(z[0, 1], rel=1e-12)


def test_singular_covariance_falls_back():
    rng = np.random.default_rng(4)
    t = rng.normal(size=20)
    pts = np.column_stack([t, 2 * t])  # rank one
    data = LabeledDataset(np.vstack([pts, pts + [1, 0]]), np.repeat([1, 2], 20))
    with pytest.warns(RuntimeWarning, match="pseudoinverse"):
        model = fit_potential_model(data, BandwidthConfig.separate(1.0, 1.0))
    assert model.notes
    z = pot_pot_transform(model, data.points)
    assert np.all(np.isfinite(z))


def test_matches_direct_kernel_sum():
    rng = np.random.default_rng(7)
    for _ in range(50):
        data, cfg, x = random_configuration(rng)
        model = fit_potential_model(data, cfg)
        for j in range(1, data.q + 1):
            ref = oracle_potential(data, cfg, x, j)
            if ref < 1e-200:
                continue
            assert potential_at(model, x, j) == pytest.approx(ref, rel=1e-10)


def test_plot_rows_include_own_kernel(rng):
    data = two_class(rng)
    model = fit_potential_model(data, BandwidthConfig.joint(1e-3))
    plot = pot_pot_plot(model, data)
    # at a tiny bandwidth each point's own kernel dominates its class potential
    assert np.all(plot.z[np.arange(data.n), data.labels - 1] > 0)


log_h = st.floats(-3, 3)


@given(log_h, st.integers(0, 10_000))
def test_potentials_positive(lh, seed):
    rng = np.random.default_rng(seed)
    data = two_class(rng, 10, 10)
    model = fit_potential_model(data, BandwidthConfig.separate(10 ** lh, 10 ** (-lh)))
    # exp may underflow to 0 far from a class; the log potential stays finite
    assert np.all(np.isfinite(model.log_potentials(data.points)))


@given(st.integers(0, 10_000), st.floats(-2, 2), st.floats(-2, 2))
def test_affine_equivariance(seed, shift, log_scale):
    """Potentials of transformed data equal the originals divided by |det A|."""
    rng = np.random.default_rng(seed)
    data = two_class(rng, 12, 9)
    a = rng.normal(size=(2, 2)) + np.eye(2) * 10 ** log_scale
    if abs(np.linalg.det(a)) < 1e-2:
        return
    b = np.array([shift, -shift])
    moved = LabeledDataset(data.points @ a.T + b, data.labels)
    x = rng.normal(size=(5, 2))
    for cfg in (BandwidthConfig.joint(0.3), BandwidthConfig.separate(0.3, 1.2)):
        z0 = pot_pot_transform(fit_potential_model(data, cfg), x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            z1 = pot_pot_transform(fit_potential_model(moved, cfg), x @ a.T + b)
        np.testing.assert_allclose(z1 * abs(np.linalg.det(a)), z0, rtol=1e-7, atol=1e-300)


def test_normalization_one_dimension():
    rng = np.random.default_rng(8)
    data = LabeledDataset(rng.normal(size=(25, 1)), np.repeat([1, 2], [15, 10]))
    grid = np.linspace(-15, 15, 6001)
    for cfg in (BandwidthConfig.joint(0.2), BandwidthConfig.separate(2.0, 0.05)):
        phi = np.exp(fit_potential_model(data, cfg).log_potentials(grid[:, None]))
        np.testing.assert_allclose(trapezoid(phi, grid, axis=0), data.priors(), atol=1e-2)


def test_larger_bandwidth_flattens(rng):
    """Peak potential falls as the bandwidth grows."""
    data = two_class(rng)
    peaks = []
    for h2 in (0.01, 0.1, 1.0, 10.0):
        z = pot_pot_transform(fit_potential_model(data, BandwidthConfig.joint(h2)), data.points)
        peaks.append(z.max())
    assert all(a > b for a, b in zip(peaks, peaks[1:]))


def test_mode_enum_values():
    assert ScalingMode("joint") is ScalingMode.JOINT
    assert ScalingMode("separate") is ScalingMode.SEPARATE
