"""CSV dataset and surface files.

Dataset files: one point per row, coordinates first, integer class label
(1..q) last, optional header row.  Surfaces: ``log10_h1,log10_h2,error`` with
one row per evaluation in evaluation order.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..potentials import LabeledDataset, ScalingMode
from ..tuning import TuneReport


class CsvFormatError(ValueError):
    pass


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path, labeled: bool = True):
    """Parse a numeric CSV; returns (points, labels or None)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    if not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise CsvFormatError(f"{path}: header only, no data rows")
    width = len(rows[0][1])
    min_width = 2 if labeled else 1
    if width < min_width:
        raise CsvFormatError(f"{path}:{rows[0][0]}: need at least {min_width} columns")
    values = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise CsvFormatError(f"{path}:{line}: ragged row with {len(cells)} cells, expected {width}")
        for c, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(f"{path}:{line}: column {c + 1}: non-numeric cell {cell.strip()!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(f"{path}:{line}: column {c + 1}: NaN/Inf not allowed")
            values[r, c] = v
    if not labeled:
        return values, None
    labels = values[:, -1]
    for r, v in enumerate(labels):
        if v != round(v) or v < 1:
            raise CsvFormatError(f"{path}:{rows[r][0]}: label {v!r} is not a positive integer")
    labels = labels.astype(int)
    present = np.unique(labels)
    if not np.array_equal(present, np.arange(1, present[-1] + 1)):
        raise CsvFormatError(f"{path}: labels not contiguous from 1: {present.tolist()}")
    if present.size < 2:
        raise CsvFormatError(f"{path}: at least two classes are required")
    return values[:, :-1], labels


def load_csv(path) -> LabeledDataset:
    points, labels = read_matrix(path, labeled=True)
    return LabeledDataset(points, labels)


def write_csv(data: LabeledDataset, path, header: bool = True) -> None:
    """Write a dataset with full float precision so a reload is exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{i + 1}" for i in range(data.d)] + ["label"])
        for p, lab in zip(data.points, data.labels):
            w.writerow([repr(float(v)) for v in p] + [int(lab)])


def surface_rows(report: TuneReport) -> list[tuple[float, float, float]]:
    rows = []
    for cfg, err in report.evaluations:
        if cfg.mode is ScalingMode.JOINT:
            h1 = h2 = cfg.h2[0]
        else:
            h1, h2 = cfg.h2[0], cfg.h2[1] if len(cfg.h2) > 1 else cfg.h2[0]
        rows.append((math.log10(h1), math.log10(h2), err))
    return rows


def export_surface(report: TuneReport, path) -> Path:
    if not report.evaluations:
        raise ValueError("empty report")
    path = Path(path)
    try:
        fh = path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write surface to {path}: {exc.strerror}") from exc
    with fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["log10_h1", "log10_h2", "error"])
        for row in surface_rows(report):
            w.writerow([f"{v:.6g}" for v in row])
    return path
