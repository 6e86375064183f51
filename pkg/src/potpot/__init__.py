"""Pot-pot plot classification: class potentials, plot separators and bandwidth tuning."""

from .classifier import PotPotClassifier
from .potentials import (BandwidthConfig, LabeledDataset, PotentialModel, PotPotPlot, ScalingMode,
                         fit_potential_model, pot_pot_plot, pot_pot_transform, potential_at)
from .separators import SeparatorKind, train_separator
from .tuning import CvProtocol, TuneReport, tune_joint, tune_regressive_separate, tune_separate

__all__ = [
    "BandwidthConfig", "CvProtocol", "LabeledDataset", "PotPotClassifier", "PotPotPlot", "PotentialModel",
    "ScalingMode", "SeparatorKind", "TuneReport", "fit_potential_model", "pot_pot_plot", "pot_pot_transform",
    "potential_at", "train_separator", "tune_joint", "tune_regressive_separate", "tune_separate",
]
