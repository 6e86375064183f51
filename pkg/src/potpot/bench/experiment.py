"""Experiment matrix: datasets x classifiers -> error table.

Simulated datasets are generated ``replications`` times from child seeds of
the master seed; every classifier in a row sees the same replications.  A
pot-pot cell is tuned on the training sample and scored on the test sample.
With ``selection = cv`` the bandwidth is chosen by cross-validation on the
training sample; with ``selection = test`` the cell reports the smallest test
error over the strategy's bandwidth budget (minimal-error reporting).

CSV datasets have no test sample: every cell is a cross-validated error using
the same folds, and pot-pot cells report the best error over the budget.
"""

from __future__ import annotations

import configparser
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import efficiency_index, train_baseline
from ..classifier import PotPotClassifier
from ..datagen import generator_for, replication_seeds
from ..potentials import LabeledDataset, ScalingMode
from ..separators import SeparatorKind
from ..tuning import (CvObjective, CvProtocol, HoldoutObjective, extreme_bandwidth, tune_joint,
                      tune_regressive_separate, tune_rot, tune_separate)
from .data_io import export_surface, load_csv

STRATEGIES = ("joint", "separate", "regressive", "joint-rot", "separate-rot", "joint-mm", "separate-mm")
SEPARATOR_NAMES = ("diagonal", "knn", "alpha")
DEPTH_NAMES = ("mahalanobis", "spatial")


@dataclass(frozen=True)
class ClassifierSpec:
    name: str
    family: str  # baseline | dd | potpot
    strategy: str = ""
    depth: str = ""
    separator: str = ""

    @property
    def kind(self) -> SeparatorKind:
        return SeparatorKind(self.separator or "diagonal")


def parse_classifier(name: str) -> ClassifierSpec:
    """``bayes|lda|qda|knn``, ``dd-<depth>-<separator>`` or ``potpot-<strategy>-<separator>``."""
    name = name.strip()
    if name in ("bayes", "lda", "qda", "knn"):
        return ClassifierSpec(name, "baseline")
    parts = name.split("-")
    if parts[0] == "dd" and len(parts) == 3 and parts[1] in DEPTH_NAMES and parts[2] in SEPARATOR_NAMES:
        return ClassifierSpec(name, "dd", depth=parts[1], separator=parts[2])
    if parts[0] == "potpot" and len(parts) >= 3:
        strategy, sep = "-".join(parts[1:-1]), parts[-1]
        if strategy in STRATEGIES and sep in SEPARATOR_NAMES:
            return ClassifierSpec(name, "potpot", strategy=strategy, separator=sep)
    raise ValueError(f"unknown classifier {name!r}")


@dataclass
class ExperimentSpec:
    datasets: list[str]
    classifiers: list[str]
    replications: int = 40
    seed: int = 0
    selection: str = "cv"
    cv_iterations: int = 200
    fold_seed: int = 0
    reference: str | None = None
    output: str | None = None
    surfaces: str | None = None
    workers: int = 1

    def validate(self) -> None:
        if not self.classifiers:
            raise ValueError("experiment needs at least one classifier")
        if not self.datasets:
            raise ValueError("experiment needs at least one dataset")
        for c in self.classifiers:
            parse_classifier(c)
        for d in self.datasets:
            if d.startswith("csv:"):
                if not Path(d[4:]).is_file():
                    raise ValueError(f"dataset file not found: {d[4:]}")
            else:
                generator_for(d)
        if self.selection not in ("cv", "test"):
            raise ValueError("selection must be 'cv' or 'test'")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.reference is not None and self.reference not in self.classifiers:
            raise ValueError(f"reference {self.reference!r} is not among the classifiers")

    @property
    def protocol(self) -> CvProtocol:
        return CvProtocol(self.cv_iterations, self.fold_seed)


_LIST_KEYS = ("datasets", "classifiers")
_INT_KEYS = ("replications", "seed", "cv_iterations", "fold_seed", "workers")
_STR_KEYS = ("selection", "reference", "output", "surfaces")


def parse_spec_text(text: str, base_dir: Path | None = None) -> ExperimentSpec:
    """Parse the flat ``key = value`` spec format (``#`` comments, comma-separated lists)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                   interpolation=None)
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ValueError(f"spec parse error: {exc}") from None
    sec = cp["experiment"]
    unknown = set(sec) - set(_LIST_KEYS + _INT_KEYS + _STR_KEYS)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    for key in _LIST_KEYS:
        if key not in sec:
            raise ValueError(f"spec is missing required key {key!r}")
    kw = {}
    for key in _LIST_KEYS:
        kw[key] = [v.strip() for v in sec[key].split(",") if v.strip()]
    for key in _INT_KEYS:
        if key in sec:
            try:
                kw[key] = int(sec[key])
            except ValueError:
                raise ValueError(f"spec key {key!r} must be an integer, got {sec[key]!r}") from None
    for key in _STR_KEYS:
        if key in sec and sec[key].strip():
            kw[key] = sec[key].strip()
    if base_dir is not None:
        kw["datasets"] = [f"csv:{(base_dir / d[4:]).as_posix()}" if d.startswith("csv:")
                          and not Path(d[4:]).is_absolute() else d for d in kw["datasets"]]
        for key in ("output", "surfaces"):
            if key in kw and not Path(kw[key]).is_absolute():
                kw[key] = (base_dir / kw[key]).as_posix()
    spec = ExperimentSpec(**kw)
    spec.validate()
    return spec


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    return parse_spec_text(path.read_text(), path.parent)


# ---------------------------------------------------------------------------
# cells


def _tune(strategy: str, data: LabeledDataset, kind: SeparatorKind, protocol: CvProtocol, objective):
    if strategy == "joint":
        return tune_joint(data, kind, protocol=protocol, objective=objective)
    if strategy == "separate":
        return tune_separate(data, kind, protocol=protocol, objective=objective)
    if strategy == "regressive":
        return tune_regressive_separate(data, kind, protocol=protocol, objective=objective)
    mode = ScalingMode.JOINT if strategy.startswith("joint") else ScalingMode.SEPARATE
    if strategy.endswith("rot"):
        return tune_rot(data, kind, mode, protocol=protocol, objective=objective)
    return extreme_bandwidth(data, kind, protocol, mode=mode, objective=objective)


def _fit_predict(spec: ClassifierSpec, train: LabeledDataset, test_points, generated=None):
    if spec.family == "baseline":
        return train_baseline(spec.name, train, generated).predict(test_points)
    return train_baseline(f"dd-{spec.depth}", train, separator=spec.kind).predict(test_points)


def simulated_error(spec: ClassifierSpec, gs, selection: str, protocol: CvProtocol):
    """Test error of one classifier on one generated set; also the tune report if any."""
    train, test = gs.train, gs.test
    if spec.family != "potpot":
        pred = _fit_predict(spec, train, test.points, gs)
        return float(np.mean(pred != test.labels)), None
    kind = spec.kind
    if selection == "test":
        report = _tune(spec.strategy, train, kind, protocol, HoldoutObjective(train, test, kind))
        return report.best_error, report
    report = _tune(spec.strategy, train, kind, protocol, CvObjective(train, kind, protocol))
    return PotPotClassifier.fit(train, report.best, kind).error_rate(test), report


def cv_baseline_error(spec: ClassifierSpec, data: LabeledDataset, protocol: CvProtocol) -> float:
    wrong = 0
    for held in protocol.folds(data):
        keep = np.ones(data.n, dtype=bool)
        keep[held] = False
        pred = _fit_predict(spec, data.subset(keep), data.points[held])
        wrong += int(np.sum(pred != data.labels[held]))
    return wrong / data.n


@dataclass
class CellResult:
    dataset: str
    classifier: str
    value: float | None = None  # percent
    sd: float | None = None
    diagnostic: str = ""


def _surface_path(surfaces: str, dataset: str, classifier: str) -> Path:
    safe = dataset.replace("/", "_").replace(":", "_").replace("*", "star")
    return Path(surfaces) / f"{safe}__{classifier}.csv"


def run_cell(spec: ExperimentSpec, dataset: str, classifier: str) -> CellResult:
    cspec = parse_classifier(classifier)
    protocol = spec.protocol
    try:
        if dataset.startswith("csv:"):
            data = load_csv(dataset[4:])
            if cspec.name == "bayes":
                raise ValueError("Bayes needs known densities (generated data only)")
            if cspec.family == "potpot":
                report = _tune(cspec.strategy, data, cspec.kind, protocol, None)
                err = report.best_error
                if spec.surfaces:
                    export_surface(report, _surface_path(spec.surfaces, dataset, classifier))
            else:
                err = cv_baseline_error(cspec, data, protocol)
            return CellResult(dataset, classifier, 100.0 * err, None)
        gen = generator_for(dataset)
        errs = []
        for r, seed in enumerate(replication_seeds(spec.seed, spec.replications)):
            err, report = simulated_error(cspec, gen(seed), spec.selection, protocol)
            errs.append(err)
            if r == 0 and report is not None and spec.surfaces:
                export_surface(report, _surface_path(spec.surfaces, dataset, classifier))
        errs = np.array(errs)
        sd = float(errs.std(ddof=1)) * 100 if errs.size > 1 else 0.0
        return CellResult(dataset, classifier, 100.0 * float(errs.mean()), sd)
    except Exception as exc:  # recorded in the cell; other cells still run
        return CellResult(dataset, classifier, None, None, f"error: {type(exc).__name__}: {exc}")


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class ErrorTable:
    rows: list[str]
    columns: list[str]
    cells: dict = field(default_factory=dict)  # (row, column) -> CellResult
    reference: str | None = None

    def value(self, row: str, column: str) -> float | None:
        return self.cells[(row, column)].value

    def efficiency(self, row: str, column: str):
        if self.reference is None:
            return None
        v, ref = self.value(row, column), self.value(row, self.reference)
        if v is None or ref is None:
            return None
        return efficiency_index(v, ref)

    def header(self) -> list[str]:
        head = ["dataset"] + list(self.columns)
        if self.reference is not None:
            head += [f"I({c})" for c in self.columns if c != self.reference]
        return head

    def as_rows(self) -> list[list[str]]:
        out = []
        for r in self.rows:
            line = [r]
            for c in self.columns:
                cell = self.cells[(r, c)]
                line.append(cell.diagnostic if cell.value is None else f"{cell.value:.1f}")
            if self.reference is not None:
                for c in self.columns:
                    if c == self.reference:
                        continue
                    idx = self.efficiency(r, c)
                    if idx is None:
                        line.append("")
                    elif not idx.defined:
                        line.append("undefined")
                    else:
                        line.append(f"{idx.value:.3f}")
            out.append(line)
        return out

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            w.writerows(self.as_rows())

    def render(self) -> str:
        table = [self.header()] + self.as_rows()
        widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
        return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table)


def run_experiment(spec: ExperimentSpec) -> ErrorTable:
    spec.validate()
    if spec.surfaces:
        Path(spec.surfaces).mkdir(parents=True, exist_ok=True)
    jobs = [(spec, d, c) for d in spec.datasets for c in spec.classifiers]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = [run_cell(*job) for job in jobs]
    table = ErrorTable(list(spec.datasets), list(spec.classifiers), reference=spec.reference)
    for res in results:
        table.cells[(res.dataset, res.classifier)] = res
    if spec.output:
        table.write_csv(spec.output)
    return table


def percent_close(value: float, target: float, tol: float) -> bool:
    return value is not None and math.isfinite(value) and abs(value - target) <= tol
