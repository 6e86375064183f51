"""Command line: generate, tune, classify, bench, selftest."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from ..classifier import PotPotClassifier
from ..datagen import generator_for
from ..potentials import BandwidthConfig, LabeledDataset, ScalingMode
from ..separators import SeparatorKind
from ..tuning import CvProtocol, HoldoutObjective
from .data_io import export_surface, load_csv, read_matrix, write_csv
from .experiment import STRATEGIES, _tune, load_spec, run_experiment

MODEL_VERSION = 1


def _cmd_generate(args) -> int:
    gs = generator_for(args.name)(args.seed)
    prefix = Path(args.out)
    write_csv(gs.train, f"{prefix}_train.csv")
    write_csv(gs.test, f"{prefix}_test.csv")
    print(f"{gs.name}: {gs.train.n} training and {gs.test.n} test points -> {prefix}_train.csv, {prefix}_test.csv")
    return 0


def _kind_from_args(args) -> SeparatorKind:
    return SeparatorKind(args.separator, k_max=args.k_max, max_degree=args.max_degree,
                         aggregation=args.aggregation)


def model_payload(data: LabeledDataset, cfg: BandwidthConfig, kind: SeparatorKind, report=None) -> dict:
    out = {
        "version": MODEL_VERSION,
        "bandwidth": {"mode": cfg.mode.value, "h2": list(cfg.h2)},
        "separator": {"name": kind.name, "k_max": kind.k_max, "max_degree": kind.max_degree,
                      "aggregation": kind.aggregation, "degree_folds": kind.degree_folds},
        "train": {"points": data.points.tolist(), "labels": data.labels.tolist()},
    }
    if report is not None:
        out["tuning"] = {"strategy": report.strategy, "evaluations": len(report.evaluations),
                         "best_error": report.best_error}
    return out


def model_from_payload(payload: dict) -> PotPotClassifier:
    if payload.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')!r}")
    bw = payload["bandwidth"]
    cfg = BandwidthConfig(ScalingMode(bw["mode"]), tuple(bw["h2"]))
    kind = SeparatorKind(**payload["separator"])
    data = LabeledDataset(np.array(payload["train"]["points"], dtype=float), np.array(payload["train"]["labels"]))
    return PotPotClassifier.fit(data, cfg, kind)


def _cmd_tune(args) -> int:
    data = load_csv(args.data)
    kind = _kind_from_args(args)
    protocol = CvProtocol(args.cv_iterations, args.fold_seed)
    objective = None
    if args.test is not None:
        objective = HoldoutObjective(data, load_csv(args.test), kind)
    report = _tune(args.strategy, data, kind, protocol, objective)
    cfg = report.best
    print(f"strategy {args.strategy}: {len(report.evaluations)} evaluations, "
          f"best error {100 * report.best_error:.2f}% at h2 = {', '.join(f'{h:.6g}' for h in cfg.h2)} "
          f"({cfg.mode.value})")
    if args.surface:
        export_surface(report, args.surface)
    if args.model:
        Path(args.model).write_text(json.dumps(model_payload(data, cfg, kind, report), indent=1) + "\n")
    return 0


def _cmd_classify(args) -> int:
    clf = model_from_payload(json.loads(Path(args.model).read_text()))
    points, labels = read_matrix(args.data, labeled=not args.unlabeled)
    if points.shape[1] != clf.model.d:
        raise ValueError(f"dimension mismatch: model has d={clf.model.d}, data has {points.shape[1]}")
    pred = clf.predict(points)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["predicted"])
        w.writerows([[int(p)] for p in pred])
    finally:
        if args.out:
            out.close()
    if labels is not None:
        print(f"error rate {100 * float(np.mean(pred != labels)):.2f}% on {labels.size} points",
              file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    spec = load_spec(args.spec)
    if args.out:
        spec.output = args.out
    table = run_experiment(spec)
    print(table.render())
    failed = [c for c in table.cells.values() if c.value is None]
    for c in failed:
        print(f"{c.dataset} x {c.classifier}: {c.diagnostic}", file=sys.stderr)
    return 1 if failed else 0


def _cmd_selftest(args) -> int:
    from .acceptance import CHECKS, run_checks, summary_ok

    numbers = args.only or sorted(CHECKS)
    results = run_checks(numbers)
    ok = summary_ok(results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="potpot", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a simulated train/test pair as CSV")
    g.add_argument("name", help="generator name, e.g. 1dist3, 2scale*4, disks_100x100, hypersphere_d3_n250")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output prefix; writes PREFIX_train.csv and PREFIX_test.csv")
    g.set_defaults(func=_cmd_generate)

    t = sub.add_parser("tune", help="select bandwidths for a CSV dataset")
    t.add_argument("data")
    t.add_argument("--strategy", choices=STRATEGIES, default="joint")
    t.add_argument("--separator", choices=("diagonal", "knn", "alpha"), default="diagonal")
    t.add_argument("--k-max", type=int, default=None)
    t.add_argument("--max-degree", type=int, default=3)
    t.add_argument("--aggregation", choices=("ovo", "ova"), default="ovo")
    t.add_argument("--cv-iterations", type=int, default=200)
    t.add_argument("--fold-seed", type=int, default=0)
    t.add_argument("--test", default=None, help="score on this labelled CSV instead of cross-validation")
    t.add_argument("--surface", default=None, help="write the error surface CSV here")
    t.add_argument("--model", default=None, help="write the tuned model JSON here")
    t.set_defaults(func=_cmd_tune)

    c = sub.add_parser("classify", help="predict labels with a tuned model")
    c.add_argument("model")
    c.add_argument("data")
    c.add_argument("--unlabeled", action="store_true", help="the data file has no label column")
    c.add_argument("--out", default=None, help="predictions CSV (stdout if omitted)")
    c.set_defaults(func=_cmd_classify)

    b = sub.add_parser("bench", help="run an experiment spec file")
    b.add_argument("spec")
    b.add_argument("--out", default=None, help="table CSV (overrides the spec's output key)")
    b.set_defaults(func=_cmd_bench)

    s = sub.add_parser("selftest", help="run the acceptance checks")
    s.add_argument("--only", type=int, nargs="*", default=None, help="criterion numbers to run")
    s.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"potpot {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
