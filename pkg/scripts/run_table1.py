#!/usr/bin/env python3
"""Full-fidelity support-recovery benchmark (200 replicates per cell).

Runs every (setting, n) cell of the benchmark table through the CLI and
collects the console summaries. One cell takes hours at n=100, d=150 on a
laptop; use --cells to run a subset, SSIR_PARALLEL or --parallel to fan out
replicates across cores, and --replicates 20 for a quick desk-scale pass.
"""

import argparse
import subprocess
import sys
from pathlib import Path

CELLS = [(setting, n) for setting in (1, 2, 3) for n in (100, 200)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-root", default="results/table1")
    ap.add_argument("--replicates", type=int, default=200)
    ap.add_argument("--d", type=int, default=150)
    ap.add_argument("--parallel", type=int, default=0,
                    help="replicate parallelism (0 = CLI default)")
    ap.add_argument("--cells", default="",
                    help="comma-separated setting:n pairs, e.g. 1:100,3:200")
    args = ap.parse_args()

    cells = CELLS
    if args.cells:
        cells = [tuple(int(v) for v in tok.split(":")) for tok in args.cells.split(",")]

    for setting, n in cells:
        out_dir = Path(args.out_root) / f"setting{setting}_n{n}"
        out_dir.mkdir(parents=True, exist_ok=True)
        cmd = [
            sys.executable, "-m", "ssir.cli", "benchmark", "table1",
            "--setting", str(setting), "--n", str(n), "--d", str(args.d),
            "--replicates", str(args.replicates),
            "--out-dir", str(out_dir),
        ]
        if args.parallel:
            cmd += ["--parallel", str(args.parallel)]
        print(f"== setting {setting}, n={n} -> {out_dir}", flush=True)
        code = subprocess.call(cmd)
        if code != 0:
            print(f"cell failed with exit code {code}", file=sys.stderr)
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
