"""Pot-pot classifier: potentials followed by a separator trained on the plot."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import (BandwidthConfig, LabeledDataset, PotentialModel, PotPotPlot,
                         fit_potential_model, pot_pot_transform)
from .separators import SeparatorKind, train_separator


@dataclass(frozen=True)
class PotPotClassifier:
    model: PotentialModel
    separator: object
    kind: SeparatorKind

    @classmethod
    def fit(cls, data: LabeledDataset, cfg: BandwidthConfig, kind: SeparatorKind = SeparatorKind()):
        model = fit_potential_model(data, cfg)
        plot = PotPotPlot(pot_pot_transform(model, data.points), data.labels, model.priors)
        return cls(model, train_separator(kind, plot), kind)

    def plot(self, points) -> np.ndarray:
        return pot_pot_transform(self.model, points)

    def predict(self, points) -> np.ndarray:
        return self.separator.classify(self.plot(points))

    def error_rate(self, data: LabeledDataset) -> float:
        return float(np.mean(self.predict(data.points) != data.labels))
