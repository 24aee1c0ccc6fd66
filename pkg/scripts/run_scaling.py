#!/usr/bin/env python3
"""Subspace-distance scaling experiment (500 replicates, d in {100, 200}).

Sweeps n with rho = 2*sqrt(log(d)/n) and K fixed at the truth, then fits the
line mean-distance ~ sqrt(log(d)/n) and reports its R^2. scaling.csv in each
output directory is plot-ready (columns n, rate, x, mean_distance, se).
"""

import argparse
import csv
import subprocess
import sys
from pathlib import Path

import numpy as np


def fit_line(path):
    rows = list(csv.DictReader(open(path)))
    x = np.array([float(r["rate"]) for r in rows])
    y = np.array([float(r["mean_distance"]) for r in rows])
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return coef[0], coef[1], r2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-root", default="results/scaling")
    ap.add_argument("--setting", type=int, default=1, choices=(1, 2, 3))
    ap.add_argument("--dims", default="100,200")
    ap.add_argument("--n-list", default="200,400,800,1600")
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--max-iter", type=int, default=6000)
    ap.add_argument("--parallel", type=int, default=0)
    args = ap.parse_args()

    for d in (int(tok) for tok in args.dims.split(",")):
        out_dir = Path(args.out_root) / f"setting{args.setting}_d{d}"
        out_dir.mkdir(parents=True, exist_ok=True)
        cmd = [
            sys.executable, "-m", "ssir.cli", "benchmark", "fig1",
            "--setting", str(args.setting), "--d", str(d),
            "--n-list", args.n_list, "--replicates", str(args.replicates),
            "--max-iter", str(args.max_iter), "--out-dir", str(out_dir),
        ]
        if args.parallel:
            cmd += ["--parallel", str(args.parallel)]
        print(f"== d={d} -> {out_dir}", flush=True)
        code = subprocess.call(cmd)
        if code != 0:
            return code
        slope, intercept, r2 = fit_line(out_dir / "scaling.csv")
        print(f"   distance ~ {slope:.2f} * sqrt(log(d)/n) + {intercept:.3f}"
              f"   (R^2 = {r2:.3f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
