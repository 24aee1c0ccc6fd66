"""Command-line front end: simulate, fit, tune, benchmark.

Conventions shared by all subcommands:

* CSV schema ``y,x1,...,xd``; floats are written with 17 significant digits
  (``%.17g``), which round-trips IEEE doubles exactly.
* Covariate indices in JSON/console output are 1-based, matching the CSV
  column names x1..xd. Library-level APIs are 0-based.
* Every run writes a manifest JSON echoing the fully resolved configuration;
  timestamps live only in manifests, so data outputs are byte-identical
  across reruns with the same seed at any parallelism degree.
* Exit codes: 0 success, 1 numerical/runtime failure, 2 usage error (bad
  flags or malformed input files).
"""

import argparse
import dataclasses
import json
import os
import sys
import time
import warnings

import numpy as np

from . import __version__
from .covariance import BasisSpec, Dataset
from .exceptions import NumericalError
from .metrics import score_correlation, subspace_distance, support_rates
from .sdr import (
    SUPPORT_THRESHOLD,
    cross_validate,
    default_rho_grid,
    fit_pfc,
    fit_sir,
)
from .simulate import SimSpec, generate, run_replicates
from .solver import SolverConfig


def _fmt(v):
    """CSV cell: strings/ints verbatim, floats at 17 significant digits, None empty."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_dataset(path, data):
    header = "y," + ",".join(f"x{j}" for j in range(1, data.d + 1))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(data.n):
            row = [_fmt(data.y[i])] + [_fmt(v) for v in data.X[i]]
            fh.write(",".join(row) + "\n")


def _locate_parse_error(path, n_fields):
    """Re-scan a CSV that numpy rejected and pinpoint the bad row/column."""
    with open(path) as fh:
        next(fh)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_fields:
                raise ValueError(
                    f"{path}:{lineno}: expected {n_fields} fields, got {len(parts)}"
                )
            for col, cell in enumerate(parts, start=1):
                try:
                    float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: column {col}: cannot parse {cell!r} as a number"
                    ) from None


def load_dataset(path):
    """Read a ``y,x1..xd`` CSV; parse failures report file:line and column."""
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        d = len(cols) - 1
        expected = ["y"] + [f"x{j}" for j in range(1, d + 1)]
        if cols != expected:
            raise ValueError(
                f"{path}:1: header must be y,x1,...,xd; got {header[:80]!r}"
            )
        try:
            with warnings.catch_warnings():
                # loadtxt warns on empty input; we raise a ValueError below
                warnings.simplefilter("ignore", UserWarning)
                body = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError:
            _locate_parse_error(path, d + 1)
            raise
    if body.size == 0:
        raise ValueError(f"{path}: no data rows")
    if body.shape[1] != d + 1:
        raise ValueError(f"{path}: rows have {body.shape[1]} fields, header has {d + 1}")
    return Dataset(body[:, 0], body[:, 1:])


def write_manifest(path, command, config, outputs):
    manifest = {
        "tool": "ssir",
        "version": __version__,
        "command": command,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": config,
        "outputs": sorted(outputs),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _resolved_config(args):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return cfg


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _one_based(indices):
    return [int(j) + 1 for j in indices]


def _parse_int_list(text, flag):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated integers, got {text!r}") from None


def _parse_float_list(text, flag):
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise ValueError(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _parse_method(text):
    """--method values: 'diff', 'slice' (5 slices), or 'slice:H'."""
    if text == "diff":
        return "diff", 5
    if text == "slice":
        return "slice", 5
    if text.startswith("slice:"):
        try:
            H = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad slice count in --method {text!r}") from None
        if H < 2:
            raise ValueError(f"--method slice:H needs H >= 2, got {H}")
        return "slice", H
    raise ValueError(f"--method must be diff, slice or slice:H, got {text!r}")


def _parse_basis(text):
    """--pfc-basis values: 'polynomial:r' or 'slice-indicator:H'."""
    kind, sep, num = text.partition(":")
    if not sep or kind not in ("polynomial", "slice-indicator"):
        raise ValueError(
            f"--pfc-basis must be polynomial:r or slice-indicator:H, got {text!r}"
        )
    try:
        order = int(num)
    except ValueError:
        raise ValueError(f"bad order in --pfc-basis {text!r}") from None
    return BasisSpec(kind=kind, order=order)


def _default_parallel():
    try:
        return max(1, int(os.environ.get("SSIR_PARALLEL", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------- simulate


def cmd_simulate(args):
    spec = SimSpec(setting=args.setting, n=args.n, d=args.d, seed=args.seed)
    data, truth = generate(spec)
    write_dataset(args.out, data)
    truth_path = args.truth_out or args.out + ".truth.json"
    _write_json(
        truth_path,
        {
            "setting": spec.setting,
            "n": spec.n,
            "d": spec.d,
            "seed": spec.seed,
            "K": truth.K,
            "support": _one_based(truth.support),
            "directions": truth.directions.tolist(),
        },
    )
    write_manifest(args.out + ".manifest.json", "simulate", _resolved_config(args),
                   [args.out, truth_path])
    print(f"wrote {data.n} rows, d={data.d} -> {args.out} (truth: {truth_path})")
    return 0


# --------------------------------------------------------------------- fit


def _fit_payload(fit, extra=None):
    rep = fit.report
    payload = {
        "K": fit.K,
        "rho": fit.rho,
        "support": _one_based(fit.support),
        "support_size": int(fit.support.size),
        "diag": np.diag(fit.Pi_hat).tolist(),
        "directions": fit.directions.tolist(),
        "eigenvalues": fit.eigenvalues.tolist(),
        "converged": bool(rep.converged),
        "iterations": int(rep.iterations),
        "final_step_norm": float(rep.final_step_norm),
    }
    if extra:
        payload.update(extra)
    return payload


def cmd_fit(args):
    data = load_dataset(args.data)
    cfg = SolverConfig(rho=args.rho, K=args.k, nu=args.nu, epsilon=args.eps,
                       max_iter=args.max_iter)
    if args.pfc_basis:
        basis = _parse_basis(args.pfc_basis)
        fit = fit_pfc(data, cfg, basis, support_threshold=args.support_threshold)
    else:
        method, H = _parse_method(args.method)
        fit = fit_sir(data, cfg, method=method, n_slices=H,
                      support_threshold=args.support_threshold)
    if args.dump_pi:
        np.save(args.dump_pi, fit.Pi_hat)
    _write_json(args.out, _fit_payload(fit, {"n": data.n, "d": data.d}))
    write_manifest(args.out + ".manifest.json", "fit", _resolved_config(args),
                   [args.out] + ([args.dump_pi] if args.dump_pi else []))
    status = "converged" if fit.report.converged else "NOT converged"
    print(
        f"fit {status} in {fit.report.iterations} iterations; "
        f"support size {fit.support.size} -> {args.out}"
    )
    if not fit.report.converged:
        print(
            f"warning: step norm {fit.report.final_step_norm:.3e} > "
            f"epsilon {cfg.epsilon:g} at max_iter {cfg.max_iter}",
            file=sys.stderr,
        )
    return 0


# -------------------------------------------------------------------- tune


def _resolve_rho_grid(args, n, d):
    if args.rho_grid:
        return np.asarray(_parse_float_list(args.rho_grid, "--rho-grid"), dtype=float)
    lo, hi = _parse_float_list(args.rho_span, "--rho-span")
    return default_rho_grid(n, d, count=args.rho_count, span=(lo, hi))


def cmd_tune(args):
    data = load_dataset(args.data)
    K_grid = _parse_int_list(args.k_grid, "--k-grid")
    rho_grid = _resolve_rho_grid(args, data.n, data.d)
    cfg = SolverConfig(rho=0.0, K=1, nu=args.nu, epsilon=args.eps,
                       max_iter=args.max_iter)
    basis = _parse_basis(args.pfc_basis) if args.pfc_basis else None
    method, H = _parse_method(args.method)
    cv = cross_validate(
        data, K_grid, rho_grid, folds=args.folds, method=method, n_slices=H,
        basis=basis, seed=args.seed, cfg=cfg,
        support_threshold=args.support_threshold,
    )
    payload = {
        "n": data.n,
        "d": data.d,
        "folds": cv.folds,
        "grid": [[K, rho] for K, rho in cv.grid],
        "errors": cv.errors.tolist(),
        "best": {"K": cv.best[0], "rho": cv.best[1]},
    }
    _write_json(args.out, payload)
    write_manifest(args.out + ".manifest.json", "tune", _resolved_config(args),
                   [args.out])
    print(f"selected K={cv.best[0]}, rho={cv.best[1]:.6g} -> {args.out}")
    return 0


# --------------------------------------------------------------- benchmark


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _summary_rows(table):
    agg = table.aggregate()
    return [(key, mean, se) for key, (mean, se) in agg.items()]


def _table1_pipeline(args, K_grid, rho_grid, cv_cfg, fit_cfg, method, H):
    def pipeline(data, truth):
        cv = cross_validate(
            data, K_grid, rho_grid, folds=args.folds, method=method,
            n_slices=H, seed=args.cv_seed, cfg=cv_cfg,
        )
        K_best, rho_best = cv.best
        cfg = dataclasses.replace(fit_cfg, rho=rho_best, K=K_best)
        fit = fit_sir(data, cfg, method=method, n_slices=H)
        rates = support_rates(truth.support, fit.support, data.d)
        corr = score_correlation(data.X, truth.directions, fit.directions)
        return {
            "K": K_best,
            "rho": rho_best,
            "tpr": rates.tpr,
            "fpr": rates.fpr,
            "corr": corr,
            "iterations": fit.report.iterations,
            "converged": int(fit.report.converged),
        }

    return pipeline


def _bench_table1(args, out_dir):
    spec = SimSpec(setting=args.setting, n=args.n, d=args.d, seed=args.seed)
    K_grid = _parse_int_list(args.k_grid, "--k-grid")
    rho_grid = _resolve_rho_grid(args, args.n, args.d)
    method, H = _parse_method(args.method)
    cv_cfg = SolverConfig(rho=0.0, K=1, nu=args.nu, epsilon=args.cv_eps,
                          max_iter=args.cv_max_iter)
    fit_cfg = SolverConfig(rho=0.0, K=1, nu=args.nu, epsilon=args.eps,
                           max_iter=args.max_iter)
    pipeline = _table1_pipeline(args, K_grid, rho_grid, cv_cfg, fit_cfg, method, H)
    table = run_replicates(spec, args.replicates, pipeline, n_jobs=args.parallel)

    keys = table.metric_keys()
    rep_rows = [[rec["replicate"], rec["seed"]] + [rec[k] for k in keys]
                for rec in table.records]
    rep_path = os.path.join(out_dir, "replicates.csv")
    _write_csv(rep_path, ["replicate", "seed"] + keys, rep_rows)
    sum_path = os.path.join(out_dir, "summary.csv")
    _write_csv(sum_path, ["metric", "mean", "se"], _summary_rows(table))

    agg = table.aggregate()
    for key in ("tpr", "fpr", "corr"):
        mean, se = agg[key]
        se_txt = f" ({100 * se:.1f})" if se is not None else ""
        print(f"{key}: {100 * mean:.1f}{se_txt}   [x100]")
    if table.failures:
        print(f"failures: {len(table.failures)}", file=sys.stderr)
    return {"rho_grid": rho_grid.tolist()}, [rep_path, sum_path]


def _bench_fig1(args, out_dir):
    n_list = _parse_int_list(args.n_list, "--n-list")
    if any(n < 2 for n in n_list):
        raise ValueError(f"--n-list values must be >= 2, got {n_list}")
    method, H = _parse_method(args.method)
    fit_cfg = SolverConfig(rho=0.0, K=1, nu=args.nu, epsilon=args.eps,
                           max_iter=args.max_iter)

    rep_rows = []
    summary_rows = []
    for n in n_list:
        spec = SimSpec(setting=args.setting, n=n, d=args.d, seed=args.seed)
        rho = 2.0 * np.sqrt(np.log(args.d) / n)
        truth_K = 2 if args.setting == 3 else 1
        cfg = dataclasses.replace(fit_cfg, rho=rho, K=truth_K)

        def pipeline(data, truth, cfg=cfg, method=method, H=H):
            fit = fit_sir(data, cfg, method=method, n_slices=H)
            dist = subspace_distance(truth.orthonormal_basis(), fit.directions)
            return {
                "distance": dist,
                "support_size": int(fit.support.size),
                "iterations": fit.report.iterations,
                "converged": int(fit.report.converged),
            }

        table = run_replicates(spec, args.replicates, pipeline, n_jobs=args.parallel)
        for rec in table.records:
            rep_rows.append([n, rec["replicate"], rec["seed"], rec["distance"],
                             rec["support_size"], rec["iterations"], rec["converged"]])
        mean, se = table.aggregate()["distance"]
        s = 5 if args.setting == 3 else 3
        rate = float(np.sqrt(np.log(args.d) / n))
        summary_rows.append([n, rate, s * rate, mean, se, len(table.records)])
        se_txt = f" ({se:.4f})" if se is not None else ""
        print(f"n={n}: mean distance {mean:.4f}{se_txt} at rho={rho:.4f}")

    rep_path = os.path.join(out_dir, "replicates.csv")
    _write_csv(rep_path, ["n", "replicate", "seed", "distance", "support_size",
                          "iterations", "converged"], rep_rows)
    sc_path = os.path.join(out_dir, "scaling.csv")
    _write_csv(sc_path, ["n", "rate", "x", "mean_distance", "se", "replicates"],
               summary_rows)
    return {"n_list": n_list}, [rep_path, sc_path]


def cmd_benchmark(args):
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    if args.mode == "table1":
        resolved, outputs = _bench_table1(args, out_dir)
    else:
        resolved, outputs = _bench_fig1(args, out_dir)
    config = _resolved_config(args)
    config["resolved"] = resolved
    write_manifest(os.path.join(out_dir, "manifest.json"), f"benchmark:{args.mode}",
                   config, outputs)
    return 0


# ------------------------------------------------------------------ parser


def _add_solver_flags(p, eps_default=1e-4, max_iter_default=2000):
    p.add_argument("--nu", type=float, default=1.0, help="ADMM step parameter")
    p.add_argument("--eps", type=float, default=eps_default,
                   help="stopping tolerance on the primal step norm")
    p.add_argument("--max-iter", type=int, default=max_iter_default,
                   help="iteration cap")


def _add_grid_flags(p, count_default, span_default):
    p.add_argument("--k-grid", default="1,2,3",
                   help="comma-separated candidate subspace dimensions")
    p.add_argument("--rho-grid", default="",
                   help="explicit comma-separated penalty values (overrides span)")
    p.add_argument("--rho-count", type=int, default=count_default,
                   help="number of log-spaced penalties")
    p.add_argument("--rho-span", default=span_default,
                   help="lo,hi multipliers of sqrt(log(d)/n) for the penalty grid")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds")


def build_parser():
    p = argparse.ArgumentParser(
        prog="ssir",
        description="Sparse sufficient dimension reduction via a convex "
                    "Fantope-constrained program solved by linearized ADMM.",
    )
    p.add_argument("--version", action="version", version=f"ssir {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate a benchmark dataset CSV")
    ps.add_argument("--setting", type=int, required=True, choices=(1, 2, 3))
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--d", type=int, required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True, help="output CSV path")
    ps.add_argument("--truth-out", default="",
                    help="truth sidecar JSON path (default: <out>.truth.json)")
    ps.set_defaults(func=cmd_simulate)

    pf = sub.add_parser("fit", help="fit at a fixed (rho, K)")
    pf.add_argument("data", help="input CSV (schema y,x1..xd)")
    pf.add_argument("--rho", type=float, required=True)
    pf.add_argument("--k", type=int, required=True)
    _add_solver_flags(pf)
    pf.add_argument("--method", default="slice",
                    help="conditional-covariance estimator: diff | slice | slice:H")
    pf.add_argument("--pfc-basis", default="",
                    help="fit principal fitted components with this basis "
                         "(polynomial:r | slice-indicator:H)")
    pf.add_argument("--support-threshold", type=float, default=SUPPORT_THRESHOLD)
    pf.add_argument("--dump-pi", default="", help="also save full Pi_hat as .npy")
    pf.add_argument("--out", required=True, help="output JSON path")
    pf.set_defaults(func=cmd_fit)

    pt = sub.add_parser("tune", help="select (K, rho) by cross-validation")
    pt.add_argument("data")
    _add_grid_flags(pt, count_default=20, span_default="0.01,4")
    _add_solver_flags(pt)
    pt.add_argument("--method", default="slice")
    pt.add_argument("--pfc-basis", default="")
    pt.add_argument("--seed", type=int, default=0, help="fold-permutation seed")
    pt.add_argument("--support-threshold", type=float, default=SUPPORT_THRESHOLD)
    pt.add_argument("--out", required=True)
    pt.set_defaults(func=cmd_tune)

    pb = sub.add_parser("benchmark", help="replicate-level experiment runner")
    pb.add_argument("mode", choices=("table1", "fig1"),
                    help="table1: CV-tuned support/correlation aggregates; "
                         "fig1: subspace distance vs n at rho=2*sqrt(log(d)/n)")
    pb.add_argument("--setting", type=int, default=1, choices=(1, 2, 3))
    pb.add_argument("--n", type=int, default=100, help="sample size (table1)")
    pb.add_argument("--d", type=int, default=150)
    pb.add_argument("--n-list", default="200,400,800,1600",
                    help="comma-separated sample sizes (fig1)")
    pb.add_argument("--replicates", type=int, default=20)
    pb.add_argument("--seed", type=int, default=0, help="base seed; replicate r uses seed+r")
    pb.add_argument("--cv-seed", type=int, default=0)
    pb.add_argument("--method", default="slice:5")
    # Span chosen so both ends stay informative at the default (n, d): above
    # ~0.9x the rate the penalty zeroes the solution outright, below ~0.1x the
    # fits go dense (false-positive rates past 0.25).
    _add_grid_flags(pb, count_default=8, span_default="0.1,0.9")
    pb.add_argument("--cv-eps", type=float, default=1e-3,
                    help="solver tolerance during cross-validation")
    pb.add_argument("--cv-max-iter", type=int, default=1000)
    _add_solver_flags(pb, eps_default=1e-4, max_iter_default=4000)
    pb.add_argument("--parallel", type=int, default=_default_parallel(),
                    help="replicate-level parallelism (env SSIR_PARALLEL sets the default)")
    pb.add_argument("--out-dir", required=True)
    pb.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"ssir: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, OSError) as exc:
        print(f"ssir: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
