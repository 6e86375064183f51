"""Bandwidth-to-error surfaces for one generated sample, ready for an external heatmap.

Writes joint (60 rows), separate (3600 rows) and regressive (85 rows) surfaces
scored on the sample's test set, or by cross-validation with --cv.
"""

import argparse
from pathlib import Path

from potpot.bench import export_surface
from potpot.datagen import generator_for
from potpot.separators import SeparatorKind
from potpot.tuning import CvObjective, CvProtocol, HoldoutObjective, tune_joint, tune_regressive_separate, tune_separate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", default="1dist3")
    ap.add_argument("--separator", default="diagonal", choices=("diagonal", "knn", "alpha"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cv", type=int, default=0, help="CV iteration cap; 0 scores on the test sample")
    ap.add_argument("--outdir", default="surfaces")
    args = ap.parse_args()
    gs = generator_for(args.dataset)(args.seed)
    kind = SeparatorKind(args.separator)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for tuner in (tune_joint, tune_separate, tune_regressive_separate):
        if args.cv:
            obj = CvObjective(gs.train, kind, CvProtocol(args.cv))
        else:
            obj = HoldoutObjective(gs.train, gs.test, kind)
        rep = tuner(gs.train, kind, objective=obj)
        path = export_surface(rep, out / f"{gs.name}_{rep.strategy}_{args.separator}.csv")
        print(f"{path}: {len(rep.evaluations)} rows, best {100 * rep.best_error:.1f}% at {rep.best.h2}")


if __name__ == "__main__":
    main()
