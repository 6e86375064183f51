import numpy as np
import pytest

from potpot.bench import OneVsAll, OneVsOne, classify_multiclass
from potpot.classifier import PotPotClassifier
from potpot.potentials import BandwidthConfig, LabeledDataset, PotPotPlot
from potpot.separators import Diagonal, SeparatorKind, train_one_vs_all, train_one_vs_one


class Fixed:
    """Binary separator that always returns the same side."""

    def __init__(self, side):
        self.side = side

    def classify(self, z):
        return np.full(np.atleast_2d(z).shape[0], self.side)


PAIRS = ((1, 2), (1, 3), (2, 3))


def test_majority_vote():
    model = OneVsOne(PAIRS, (Fixed(2), Fixed(1), Fixed(1)), np.array([1 / 3] * 3))
    # votes: 1v2 -> 2, 1v3 -> 1, 2v3 -> 2
    assert classify_multiclass(model, "ovo", [0.1, 0.2, 0.3]) == 2


def test_vote_cycle_goes_to_largest_prior():
    model = OneVsOne(PAIRS, (Fixed(1), Fixed(2), Fixed(1)), np.array([0.5, 0.3, 0.2]))
    # 1 beats 2, 3 beats 1, 2 beats 3
    assert classify_multiclass(model, "ovo", [0.1, 0.2, 0.3]) == 1


def test_binary_rejected():
    model = OneVsOne(((1, 2),), (Fixed(1),), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        classify_multiclass(model, "ovo", [0.1, 0.2])


def three_gaussians(rng, n):
    centres = np.array([[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]])
    pts = np.vstack([rng.normal(size=(n, 2)) + c for c in centres])
    return LabeledDataset(pts, np.repeat([1, 2, 3], n))


@pytest.mark.parametrize("name", ["diagonal", "alpha", "knn"])
@pytest.mark.parametrize("aggregation", ["ovo", "ova"])
def test_well_separated_three_classes(name, aggregation):
    rng = np.random.default_rng(0)
    train, test = three_gaussians(rng, 40), three_gaussians(rng, 100)
    clf = PotPotClassifier.fit(train, BandwidthConfig.joint(0.3), SeparatorKind(name, aggregation=aggregation))
    assert clf.error_rate(test) == 0


def test_aggregates_on_plot():
    rng = np.random.default_rng(1)
    z = rng.random((60, 3))
    labels = np.argmax(z, axis=1) + 1
    plot = PotPotPlot(z, labels)
    ovo = train_one_vs_one(plot, SeparatorKind("alpha"))
    ova = train_one_vs_all(plot, SeparatorKind("diagonal"))
    assert isinstance(ovo, OneVsOne) and isinstance(ova, OneVsAll)
    assert np.array_equal(ovo.classify(z), labels)
    assert np.array_equal(ova.classify(z), labels)
    for row in z[:5]:
        assert classify_multiclass(ovo, "ovo", row) == np.argmax(row) + 1
    assert isinstance(ova.separators[0], Diagonal)
