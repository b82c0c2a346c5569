#!/usr/bin/env python3
"""Isometry-defect sweep over a custom schedule, printed as a table.

Example:
    python scripts/sweep_isometry.py --theta 1/2 --band 2 --ns 8,16,32,64
"""

import argparse

from fuzzytorus.experiments import ExperimentConfig, run_isometry_defect


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--theta", default="0", help="0 or a fraction p/m")
    p.add_argument("--band", type=int, default=2)
    p.add_argument("--ns", default="16,32,64,128,256")
    p.add_argument("--samples", type=int, default=40)
    p.add_argument("--seed", type=int, default=20240901)
    return p.parse_args()


def main():
    args = parse_args()
    theta = None
    if args.theta != "0":
        p, m = args.theta.split("/")
        theta = (int(p), int(m))
    cfg = ExperimentConfig(
        experiment="isometry",
        seed=args.seed,
        theta=theta,
        band=args.band,
        amplifications=(1, 2),
        n_schedule=tuple(int(x) for x in args.ns.split(",")),
        samples=args.samples,
        lip_samples=min(args.samples, 10),
        grid=512 if theta is None else 128,
        eps=0.05,
    )
    rows = run_isometry_defect(cfg)
    print(f"{'n':>6}  {'norm defect':>12}  {'lip defect':>12}")
    by_n = {}
    for r in rows:
        if r.n is not None:
            by_n.setdefault(r.n, {})[r.metric] = r.value
    for n in sorted(by_n):
        d = by_n[n]
        print(f"{n:>6}  {d['isometry_norm_defect']:>12.6f}  "
              f"{d['isometry_lip_defect']:>12.6f}")
    for r in rows:
        if r.n is None:
            print(f"{r.metric}: {r.value:.3f}")


if __name__ == "__main__":
    main()
