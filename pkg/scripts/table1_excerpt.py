"""Location family, series 1: error table for the reference and pot-pot classifiers.

    python3 scripts/table1_excerpt.py --replications 40 --out table1.csv
"""

import argparse

from potpot.bench import ExperimentSpec, run_experiment

CLASSIFIERS = [
    "bayes", "lda", "qda", "knn", "dd-mahalanobis-alpha", "dd-spatial-alpha",
    "potpot-joint-alpha", "potpot-regressive-alpha",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--replications", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--selection", choices=("cv", "test"), default="test")
    ap.add_argument("--cv-iterations", type=int, default=10)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    spec = ExperimentSpec([f"1dist{i}" for i in range(1, 5)], CLASSIFIERS, replications=args.replications,
                          seed=args.seed, selection=args.selection, cv_iterations=args.cv_iterations,
                          reference="bayes", output=args.out)
    print(run_experiment(spec).render())


if __name__ == "__main__":
    main()
