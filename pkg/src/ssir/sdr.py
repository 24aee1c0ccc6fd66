"""Fitting, prediction and cross-validated tuning for the sparse subspace estimator.

fit_sir / fit_pfc assemble the input matrices (inverse-regression or
fitted-component covariance), run the linearized ADMM solver, and package the
top-K eigenvectors of the solution together with the recovered variable
support. predict_mean implements Gaussian-kernel smoothing on the reduced
coordinates; cross_validate tunes (K, rho) by M-fold prediction error.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .covariance import Dataset, conditional_cov, fit_cov, sample_cov
from .linalg import sym_eigen
from .solver import SolverConfig, ladmm_solve

# Soft-thresholding produces exact zeros, so any small positive cutoff on
# diag(Pi_hat) only absorbs eigensolver rounding.
SUPPORT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class FitResult:
    """Fitted projection Pi_hat, its top-K eigenvectors, and the diag support.

    directions has orthonormal columns (eigenvectors for the K largest
    eigenvalues of Pi_hat); support holds the 0-based indices j with
    Pi_hat[j, j] above the support threshold.
    """

    Pi_hat: np.ndarray
    directions: np.ndarray
    eigenvalues: np.ndarray
    support: np.ndarray
    K: int
    rho: float
    report: object


@dataclass(frozen=True)
class CVReport:
    """Cross-validation grid, per-candidate mean prediction errors, and the winner.

    errors[i] averages fold_errors[i, :] (the in-fold mean squared errors of
    grid[i]). best attains the minimal error; exact ties go to the smaller K,
    then the larger rho (the sparser model).
    """

    grid: list
    errors: np.ndarray
    fold_errors: np.ndarray
    best: tuple
    folds: int


def _package(M, Sigma, cfg, support_threshold, init=None):
    report = ladmm_solve(M, Sigma, cfg, init=init)
    dec = sym_eigen(report.Pi_hat)
    directions = dec.eigenvectors[:, : cfg.K]
    support = np.flatnonzero(np.diag(report.Pi_hat) > support_threshold)
    return FitResult(
        Pi_hat=report.Pi_hat,
        directions=directions,
        eigenvalues=dec.eigenvalues[: cfg.K],
        support=support,
        K=cfg.K,
        rho=cfg.rho,
        report=report,
    )


def fit_sir(data, cfg, method="slice", n_slices=5,
            support_threshold=SUPPORT_THRESHOLD, init=None):
    """Sparse sliced-inverse-regression fit.

    Estimates cov{E(x|y)} by ``conditional_cov`` (see there for the two
    methods), solves the penalized program at (cfg.rho, cfg.K), and returns
    the packaged FitResult. Non-convergence at max_iter is reported in
    ``result.report.converged``, not raised.
    """
    M = conditional_cov(data, method=method, n_slices=n_slices)
    Sigma = sample_cov(data.X)
    return _package(M, Sigma, cfg, support_threshold, init=init)


def fit_pfc(data, cfg, basis, support_threshold=SUPPORT_THRESHOLD, init=None):
    """Sparse principal-fitted-components fit.

    Same program as fit_sir with the fitted-value covariance of the basis
    regression in place of the inverse-regression covariance. Requires
    cfg.K < basis.order. The slice-indicator basis uses the pseudo-inverse
    projection (its centered columns are exactly collinear).
    """
    if cfg.K >= basis.order:
        raise ValueError(
            f"fitted-component rank K={cfg.K} must be < basis order {basis.order}"
        )
    M = fit_cov(data, basis, allow_pinv=(basis.kind == "slice-indicator"))
    Sigma = sample_cov(data.X)
    return _package(M, Sigma, cfg, support_threshold, init=init)


def predict_mean(fit, train, x_star):
    """Kernel-weighted conditional-mean prediction at a single point.

    Weights are exp(-||r* - r_i||^2 / 2) on the reduced coordinates
    r = directions' x, normalized to sum to one. The computation rescales the
    max weight to 1 (so the normalizer cannot underflow to 0) and averages
    responses relative to min(y); both transformations cancel algebraically,
    and the latter makes a constant response predict exactly that constant.
    Should the weights still degenerate, the nearest training point's
    response is returned.
    """
    x_star = np.asarray(x_star, dtype=float)
    if x_star.shape != (train.d,):
        raise ValueError(f"x_star must have shape ({train.d},), got {x_star.shape}")
    if not np.isfinite(x_star).all():
        raise ValueError("x_star contains non-finite values")
    R = train.X @ fit.directions
    r_star = x_star @ fit.directions
    # overflow/NaN land in the nearest-neighbor fallback below, by design
    with np.errstate(over="ignore", invalid="ignore"):
        sq = ((R - r_star) ** 2).sum(axis=1)
        w = np.exp(-0.5 * (sq - sq.min()))
        s = w.sum()
    if not np.isfinite(s) or s <= 0.0:
        return float(train.y[np.argmin(sq)])
    anchor = train.y.min()
    return float(anchor + (w @ (train.y - anchor)) / s)


def default_rho_grid(n, d, count=20, span=(0.01, 4.0)):
    """Log-spaced penalty grid: ``count`` multiples of sqrt(log(d)/n) spanning ``span``."""
    rate = np.sqrt(np.log(d) / n)
    return rate * np.geomspace(span[0], span[1], count)


def cross_validate(data, K_grid, rho_grid=None, folds=5, method="slice",
                   n_slices=5, basis=None, seed=0, cfg=None,
                   support_threshold=SUPPORT_THRESHOLD):
    """Tune (K, rho) by M-fold cross-validated prediction error.

    ``folds`` is either a fold count — the partition is then contiguous
    blocks of a seeded random permutation — or an explicit sequence of
    held-out index arrays. For every candidate, the model is fitted on the
    out-of-fold data and each held-out response is predicted by
    predict_mean; the criterion is the average over folds of the in-fold
    mean squared error. Within one (K, fold) the rho path is solved in
    decreasing order with warm starts (identical fixed points, fewer
    iterations).

    ``basis`` switches to the fitted-components estimator; otherwise
    ``method``/``n_slices`` select the inverse-regression estimator. ``cfg``
    supplies solver settings (its rho and K are overridden per candidate).
    """
    if isinstance(folds, (int, np.integer)):
        if folds < 2:
            raise ValueError(f"need at least 2 folds, got {folds}")
        rng = np.random.default_rng(seed)
        fold_idx = np.array_split(rng.permutation(data.n), folds)
    else:
        fold_idx = [np.asarray(f, dtype=int) for f in folds]
        if len(fold_idx) < 2:
            raise ValueError(f"need at least 2 folds, got {len(fold_idx)}")
    if rho_grid is None:
        rho_grid = default_rho_grid(data.n, data.d)
    K_grid = [int(K) for K in K_grid]
    rho_desc = np.sort(np.asarray(rho_grid, dtype=float))[::-1]
    if cfg is None:
        cfg = SolverConfig(rho=0.0, K=1)

    min_fold = max(10, 2 * n_slices)
    sizes = [len(f) for f in fold_idx]
    if min(sizes) < min_fold:
        raise ValueError(
            f"smallest fold has {min(sizes)} points; need >= {min_fold} "
            f"(n={data.n}, folds={len(fold_idx)})"
        )

    grid = [(K, float(r)) for K in sorted(K_grid) for r in rho_desc]
    row_of = {pair: i for i, pair in enumerate(grid)}
    fold_errors = np.zeros((len(grid), len(fold_idx)))
    for m, test_idx in enumerate(fold_idx):
        train_mask = np.ones(data.n, dtype=bool)
        train_mask[test_idx] = False
        train = data.subset(np.flatnonzero(train_mask))
        held_X = data.X[test_idx]
        held_y = data.y[test_idx]
        for K in sorted(K_grid):
            state = None
            for r in rho_desc:
                sub_cfg = dataclasses.replace(cfg, rho=float(r), K=K)
                if basis is not None:
                    fit = fit_pfc(train, sub_cfg, basis,
                                  support_threshold=support_threshold, init=state)
                else:
                    fit = fit_sir(train, sub_cfg, method=method, n_slices=n_slices,
                                  support_threshold=support_threshold, init=state)
                state = fit.report.state
                preds = np.array([predict_mean(fit, train, x) for x in held_X])
                fold_errors[row_of[(K, float(r))], m] = float(((held_y - preds) ** 2).mean())

    errors = fold_errors.mean(axis=1)
    order = sorted(range(len(grid)), key=lambda i: (errors[i], grid[i][0], -grid[i][1]))
    return CVReport(grid=grid, errors=errors, fold_errors=fold_errors,
                    best=grid[order[0]], folds=len(fold_idx))
