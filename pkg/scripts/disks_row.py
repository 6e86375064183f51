"""Nested disks: pot-pot separators under joint and separate scaling, with ROT and mM columns.

The separate-grid k-NN column evaluates 3600 bandwidth pairs per replication,
about 20 s each on one core.
"""

import argparse

from potpot.bench import ExperimentSpec, run_experiment

COLUMNS = [
    "potpot-joint-diagonal", "potpot-joint-knn", "potpot-joint-rot-knn", "potpot-joint-mm-knn",
    "potpot-separate-diagonal", "potpot-separate-knn", "potpot-separate-rot-knn", "potpot-separate-mm-knn",
    "potpot-regressive-diagonal", "potpot-regressive-knn",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--variant", default="disks_100x100",
                    choices=["disks_100x100", "disks_400x400", "disks_80x120", "disks_300x500"])
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    ap.add_argument("--surfaces", default=None, help="directory for first-replication error surfaces")
    args = ap.parse_args()
    spec = ExperimentSpec([args.variant], COLUMNS, replications=args.replications, seed=args.seed,
                          selection="test", output=args.out, surfaces=args.surfaces)
    table = run_experiment(spec)
    print(table.render())
    for c in COLUMNS:
        cell = table.cells[(args.variant, c)]
        if cell.sd is not None:
            print(f"{c}: sd {cell.sd:.2f}")


if __name__ == "__main__":
    main()
