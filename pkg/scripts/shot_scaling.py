"""Corrected vs raw fidelity as a function of shot count for one catalog circuit.

    python3 scripts/shot_scaling.py --family qpe --m 5 --theta 0.96875
"""
import argparse
import csv
import sys

from decpauli.pipeline import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="ghz")
    ap.add_argument("--n", type=int)
    ap.add_argument("--m", type=int)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--shots", type=int, nargs="+", default=[2_000, 10_000, 50_000, 200_000])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    params = {k: getattr(args, k) for k in ("n", "m", "theta") if getattr(args, k) is not None}
    if not params:
        params = {"n": 6}

    w = csv.writer(sys.stdout)
    w.writerow(["shots", "seed", "fidelity_raw", "fidelity_corrected", "negative_mass"])
    for shots in args.shots:
        for seed in range(args.seeds):
            r = run_experiment(ExperimentConfig(family=args.family, params=params,
                                                shots=shots, seed=seed))
            w.writerow([shots, seed, r.fidelity_raw, r.fidelity_corrected,
                        r.diagnostics["negative_mass"]])


if __name__ == "__main__":
    main()
