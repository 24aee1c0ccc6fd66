"""Estimator-level behavior: fitting, prediction, cross-validated tuning."""

import dataclasses
from types import SimpleNamespace

import numpy as np
import pytest
import scipy.linalg

from ssir.covariance import BasisSpec, Dataset, conditional_cov, sample_cov
from ssir.metrics import score_correlation, subspace_distance
from ssir.sdr import (
    SUPPORT_THRESHOLD,
    cross_validate,
    default_rho_grid,
    fit_pfc,
    fit_sir,
    predict_mean,
)
from ssir.simulate import SimSpec, generate
from ssir.solver import SolverConfig

from conftest import rng  # noqa: F401


def setting1(n, d, seed):
    return generate(SimSpec(setting=1, n=n, d=d, seed=seed))


class TestFitSir:
    def test_result_invariants(self):
        data, _ = setting1(150, 12, seed=3)
        cfg = SolverConfig(rho=0.05, K=2, epsilon=1e-6, max_iter=5000)
        fit = fit_sir(data, cfg)
        assert fit.directions.shape == (12, 2)
        assert np.max(np.abs(fit.directions.T @ fit.directions - np.eye(2))) <= 1e-8
        # returned eigenpairs belong to Pi_hat
        for k in range(2):
            v = fit.directions[:, k]
            lam = fit.eigenvalues[k]
            assert np.linalg.norm(fit.Pi_hat @ v - lam * v) <= 1e-6
        assert np.array_equal(
            fit.support, np.flatnonzero(np.diag(fit.Pi_hat) > SUPPORT_THRESHOLD))
        assert fit.K == 2 and fit.rho == 0.05

    def test_near_unpenalized_matches_generalized_eigenproblem(self):
        # rho=0: the program's top-K span is the dense GEV span
        data, _ = setting1(500, 10, seed=1)
        fit = fit_sir(data, SolverConfig(rho=0.0, K=1, epsilon=1e-7, max_iter=20000))
        M = conditional_cov(data)
        Sigma = sample_cov(data.X)
        w, V = scipy.linalg.eigh(M, Sigma)
        dense = V[:, -1:] / np.linalg.norm(V[:, -1])  # top generalized eigvec
        assert subspace_distance(fit.directions, dense) <= 0.05

    def test_signal_recovery_moderate_dims(self):
        corrs, hits = [], []
        rho = 0.4 * np.sqrt(np.log(60) / 200)
        for seed in range(1, 7):
            data, truth = setting1(200, 60, seed=seed)
            fit = fit_sir(data, SolverConfig(rho=rho, K=1, epsilon=1e-4, max_iter=2000))
            corrs.append(score_correlation(data.X, truth.directions, fit.directions))
            hits.append(set(truth.support) <= set(fit.support.tolist()))
        assert min(corrs) >= 0.80
        assert np.mean(corrs) >= 0.85
        assert sum(hits) >= 5

    def test_null_model_support_nearly_empty(self):
        # y independent of x: moderate penalty should keep almost nothing
        rho = 0.7 * np.sqrt(np.log(20) / 100)
        fracs = []
        for seed in range(20):
            g = np.random.default_rng(1000 + seed)
            data = Dataset(g.standard_normal(100), g.standard_normal((100, 20)))
            fit = fit_sir(data, SolverConfig(rho=rho, K=1, epsilon=1e-4, max_iter=2000))
            fracs.append(len(fit.support) / 20)
        assert np.mean(fracs) <= 0.05

    def test_non_convergence_reported_not_raised(self):
        data, _ = setting1(100, 8, seed=0)
        fit = fit_sir(data, SolverConfig(rho=0.01, K=1, epsilon=1e-12, max_iter=3))
        assert fit.report.converged is False
        assert fit.report.iterations == 3

    def test_pipeline_permutation_equivariance(self, rng):
        data, _ = setting1(200, 10, seed=8)
        perm = rng.permutation(10)
        permuted = Dataset(data.y, data.X[:, perm])
        cfg = SolverConfig(rho=0.08, K=1, epsilon=1e-8, max_iter=20000)
        base = fit_sir(data, cfg)
        mapped = fit_sir(permuted, cfg)
        # column j of the permuted data is original covariate perm[j], so
        # supports and directions must map through the inverse permutation
        inv = np.argsort(perm)
        assert set(mapped.support.tolist()) == {int(inv[j]) for j in base.support}
        assert subspace_distance(base.directions, mapped.directions[inv]) <= 1e-4

    def test_method_passthrough(self):
        data, _ = setting1(120, 8, seed=4)
        cfg = SolverConfig(rho=0.05, K=1)
        a = fit_sir(data, cfg, method="diff")
        b = fit_sir(data, cfg, method="slice", n_slices=4)
        assert a.Pi_hat.shape == b.Pi_hat.shape
        assert not np.array_equal(a.Pi_hat, b.Pi_hat)


class TestFitPfc:
    def test_rank_must_be_below_basis_order(self):
        data, _ = setting1(100, 8, seed=0)
        with pytest.raises(ValueError, match="must be <"):
            fit_pfc(data, SolverConfig(rho=0.1, K=2),
                    BasisSpec(kind="polynomial", order=2))

    def test_polynomial_basis_recovers_monotone_link(self):
        rho = 0.4 * np.sqrt(np.log(50) / 200)
        corrs = []
        for seed in range(1, 11):
            data, truth = generate(SimSpec(setting=2, n=200, d=50, seed=seed))
            fit = fit_pfc(data, SolverConfig(rho=rho, K=1, epsilon=1e-4, max_iter=2000),
                          BasisSpec(kind="polynomial", order=2))
            corrs.append(score_correlation(data.X, truth.directions, fit.directions))
        assert min(corrs) >= 0.8
        assert np.mean(corrs) >= 0.9

    def test_slice_indicator_tracks_slice_sir(self):
        data, _ = setting1(300, 8, seed=6)
        cfg = SolverConfig(rho=0.05, K=1, epsilon=1e-7, max_iter=20000)
        sir = fit_sir(data, cfg, method="slice", n_slices=5)
        pfc = fit_pfc(data, cfg, BasisSpec(kind="slice-indicator", order=5))
        assert subspace_distance(sir.directions, pfc.directions) <= 0.1


def stub_fit(directions):
    return SimpleNamespace(directions=np.asarray(directions, dtype=float))


class TestPredictMean:
    def test_matches_explicit_weighted_mean(self, rng):
        data, _ = setting1(80, 6, seed=2)
        fit = fit_sir(data, SolverConfig(rho=0.05, K=1))
        for _ in range(10):
            x_star = rng.standard_normal(6)
            r = data.X @ fit.directions
            sq = ((r - x_star @ fit.directions) ** 2).sum(axis=1)
            w = np.exp(-0.5 * sq)
            w = w / w.sum()
            assert abs(w.sum() - 1.0) <= 1e-12
            expected = w @ data.y
            assert predict_mean(fit, data, x_star) == pytest.approx(expected, abs=1e-10)

    def test_isolated_point_dominates(self):
        X = np.zeros((4, 3))
        X[1:, 0] = [10.0, 11.0, 12.0]
        train = Dataset(np.array([5.0, -1.0, -2.0, -3.0]), X)
        pred = predict_mean(stub_fit(np.eye(3)[:, :1]), train, np.zeros(3))
        assert pred == pytest.approx(5.0, abs=1e-12)

    def test_constant_response_exact(self, rng):
        X = rng.standard_normal((30, 4))
        train = Dataset(np.full(30, 3.7), X)
        for _ in range(5):
            pred = predict_mean(stub_fit(rng.standard_normal((4, 2))), train,
                                rng.standard_normal(4))
            assert pred == 3.7  # bitwise, not approximately

    def test_three_point_symmetry(self):
        X = np.array([[0.0, 9.0], [1.0, 9.0], [2.0, 9.0]])
        train = Dataset(np.array([0.0, 1.0, 2.0]), X)
        pred = predict_mean(stub_fit([[1.0], [0.0]]), train, np.array([1.0, -4.0]))
        assert pred == pytest.approx(1.0, abs=1e-12)

    def test_translation_equivariance(self, rng):
        data, _ = setting1(60, 5, seed=9)
        fit = fit_sir(data, SolverConfig(rho=0.05, K=1))
        shifted = Dataset(data.y + 100.0, data.X)
        x_star = rng.standard_normal(5)
        a = predict_mean(fit, data, x_star)
        b = predict_mean(fit, shifted, x_star)
        assert b - a == pytest.approx(100.0, abs=1e-10)

    def test_prediction_within_response_range(self, rng):
        data, _ = setting1(60, 5, seed=10)
        fit = fit_sir(data, SolverConfig(rho=0.05, K=1))
        for _ in range(20):
            p = predict_mean(fit, data, rng.standard_normal(5))
            assert data.y.min() <= p <= data.y.max()

    def test_overflowed_distances_fall_back_to_nearest(self):
        X = np.zeros((3, 2))
        train = Dataset(np.array([7.0, 8.0, 9.0]), X)
        # squared distances overflow to inf for every point; the nearest-
        # neighbor fallback returns the first argmin
        pred = predict_mean(stub_fit(np.eye(2)[:, :1]), train,
                            np.array([1e200, 0.0]))
        assert pred == 7.0

    def test_input_validation(self):
        data, _ = setting1(30, 4, seed=0)
        fit = fit_sir(data, SolverConfig(rho=0.05, K=1))
        with pytest.raises(ValueError, match="shape"):
            predict_mean(fit, data, np.zeros(5))
        with pytest.raises(ValueError, match="non-finite"):
            predict_mean(fit, data, np.array([np.nan, 0.0, 0.0, 0.0]))


class TestDefaultRhoGrid:
    def test_shape_and_endpoints(self):
        g = default_rho_grid(100, 150)
        rate = np.sqrt(np.log(150) / 100)
        assert g.shape == (20,)
        assert g[0] == pytest.approx(0.01 * rate, rel=1e-12)
        assert g[-1] == pytest.approx(4.0 * rate, rel=1e-12)
        ratios = g[1:] / g[:-1]
        assert np.allclose(ratios, ratios[0])  # geometric spacing

    def test_custom_span(self):
        g = default_rho_grid(400, 50, count=5, span=(0.1, 1.0))
        assert g.size == 5
        assert g[0] < g[-1]


class TestCrossValidate:
    def test_single_candidate(self):
        data, _ = setting1(100, 6, seed=5)
        cv = cross_validate(data, [1], rho_grid=[0.07], folds=5,
                            cfg=SolverConfig(rho=1, K=1, epsilon=1e-3, max_iter=300))
        assert cv.best == (1, 0.07)
        assert cv.errors.shape == (1,)
        assert cv.fold_errors.shape == (1, 5)

    def test_best_attains_min_and_errors_average_folds(self):
        data, _ = setting1(120, 8, seed=6)
        cv = cross_validate(data, [1, 2], rho_grid=[0.02, 0.1], folds=4,
                            cfg=SolverConfig(rho=1, K=1, epsilon=1e-3, max_iter=400))
        assert len(cv.grid) == 4
        np.testing.assert_allclose(cv.errors, cv.fold_errors.mean(axis=1))
        i = cv.grid.index(cv.best)
        assert cv.errors[i] == cv.errors.min()

    def test_duplicated_rows_give_mirrored_fold_errors(self):
        data, _ = setting1(40, 5, seed=7)
        doubled = Dataset(np.concatenate([data.y, data.y]),
                          np.vstack([data.X, data.X]))
        folds = [np.arange(40), np.arange(40, 80)]
        cv = cross_validate(doubled, [1], rho_grid=[0.05, 0.15], folds=folds,
                            cfg=SolverConfig(rho=1, K=1, epsilon=1e-4, max_iter=500))
        # each fold trains on an exact copy of the other fold's test set
        assert np.array_equal(cv.fold_errors[:, 0], cv.fold_errors[:, 1])

    def test_tie_break_prefers_small_K_then_large_rho(self):
        # constant response: every candidate predicts it exactly, so all
        # errors are identically zero and the tie-break decides
        g = np.random.default_rng(0)
        data = Dataset(np.full(60, 2.5), g.standard_normal((60, 6)))
        cv = cross_validate(data, [2, 1], rho_grid=[0.01, 0.3, 0.1], folds=3,
                            cfg=SolverConfig(rho=1, K=1, epsilon=1e-3, max_iter=200))
        assert np.all(cv.errors == 0.0)
        assert cv.best == (1, 0.3)

    def test_deterministic_given_seed(self):
        data, _ = setting1(90, 6, seed=11)
        kw = dict(rho_grid=[0.03, 0.12], folds=3,
                  cfg=SolverConfig(rho=1, K=1, epsilon=1e-3, max_iter=300))
        a = cross_validate(data, [1], seed=4, **kw)
        b = cross_validate(data, [1], seed=4, **kw)
        c = cross_validate(data, [1], seed=5, **kw)
        assert np.array_equal(a.fold_errors, b.fold_errors)
        assert not np.array_equal(a.fold_errors, c.fold_errors)

    def test_explicit_fold_arrays_used_verbatim(self):
        data, _ = setting1(60, 5, seed=12)
        folds = [np.arange(0, 20), np.arange(20, 40), np.arange(40, 60)]
        cv = cross_validate(data, [1], rho_grid=[0.05], folds=folds,
                            cfg=SolverConfig(rho=1, K=1, epsilon=1e-3, max_iter=300))
        assert cv.folds == 3

    def test_fold_validation(self):
        data, _ = setting1(100, 6, seed=0)
        with pytest.raises(ValueError, match="at least 2 folds"):
            cross_validate(data, [1], rho_grid=[0.1], folds=1)
        with pytest.raises(ValueError, match="smallest fold"):
            cross_validate(data, [1], rho_grid=[0.1], folds=12)

    @pytest.mark.slow
    def test_modal_selected_K_is_true_K(self):
        rate = np.sqrt(np.log(20) / 200)
        Ks = []
        for seed in range(1, 8):
            data, _ = generate(SimSpec(setting=1, n=200, d=20, seed=seed))
            cv = cross_validate(
                data, [1, 2], rho_grid=rate * np.geomspace(0.2, 0.8, 4),
                folds=5, seed=0,
                cfg=SolverConfig(rho=1, K=1, epsilon=1e-4, max_iter=1500))
            Ks.append(cv.best[0])
        assert sorted(Ks, key=Ks.count)[-1] == 1  # modal selection
