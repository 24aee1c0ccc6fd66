import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ssir.fantope import project_fantope, solve_gamma

from conftest import random_symmetric


def clip_sum(omega, gamma):
    return np.minimum(1.0, np.maximum(omega - gamma, 0.0)).sum()


def gamma_bisect(omega, K, tol=1e-12):
    """Independent oracle: bisection on the monotone map gamma -> clip sum."""
    omega = np.asarray(omega, dtype=float)
    if clip_sum(omega, 0.0) <= K:
        return 0.0
    lo, hi = 0.0, float(omega.max())
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if clip_sum(omega, mid) > K:
            lo = mid
        else:
            hi = mid
    return hi


omegas = arrays(
    np.float64,
    st.integers(1, 12),
    elements=st.floats(min_value=-5, max_value=5, allow_nan=False),
)


class TestSolveGamma:
    def test_shift_needed(self):
        sol = solve_gamma(np.array([2.0, 0.5, 0.1]), 1)
        assert sol.gamma_star == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(sol.clipped_values, [1.0, 0.0, 0.0], atol=1e-12)
        assert sol.achieved_trace == pytest.approx(1.0, abs=1e-12)

    def test_already_feasible_boundary(self):
        sol = solve_gamma(np.array([1.0, 0.0, 0.0]), 1)
        assert sol.gamma_star == 0.0
        assert np.allclose(sol.clipped_values, [1.0, 0.0, 0.0])

    def test_slack_budget(self):
        sol = solve_gamma(np.array([0.3, 0.3]), 2)
        assert sol.gamma_star == 0.0
        assert np.allclose(sol.clipped_values, [0.3, 0.3])

    def test_negative_entries_inert(self):
        sol = solve_gamma(np.array([2.0, -3.0, 0.5, 0.1]), 1)
        assert sol.gamma_star == pytest.approx(0.5, abs=1e-12)

    def test_rejects_K_below_one(self):
        with pytest.raises(ValueError):
            solve_gamma(np.array([1.0]), 0)

    @given(omegas, st.integers(1, 6))
    def test_agrees_with_bisection(self, omega, K):
        got = solve_gamma(omega, K).gamma_star
        assert got == pytest.approx(gamma_bisect(omega, K), abs=1e-10)

    @given(omegas, st.integers(1, 6))
    def test_monotone_map_brackets_K_at_gamma_star(self, omega, K):
        g = solve_gamma(omega, K).gamma_star
        if g > 0:
            assert clip_sum(omega, g - 1e-8) >= K - 1e-7
            assert clip_sum(omega, g + 1e-8) <= K + 1e-7

    @given(omegas, st.integers(1, 6))
    def test_gamma_star_is_minimal(self, omega, K):
        g = solve_gamma(omega, K).gamma_star
        assert clip_sum(omega, g) <= K + 1e-9
        if g > 1e-9:
            # any smaller shift is infeasible
            assert clip_sum(omega, g * (1 - 1e-6) - 1e-12) > K - 1e-6


class TestProjectFantope:
    def test_diagonal_example(self):
        H = project_fantope(np.diag([2.0, 0.5, 0.1]), 1)
        assert np.allclose(H, np.diag([1.0, 0.0, 0.0]), atol=1e-12)

    def test_feasible_point_is_fixed(self, rng):
        U = np.linalg.qr(rng.standard_normal((5, 5)))[0]
        W = (U * [0.9, 0.6, 0.4, 0.05, 0.0]) @ U.T
        W = (W + W.T) / 2
        assert np.abs(project_fantope(W, 2) - W).max() <= 1e-10

    def test_negative_definite_maps_to_zero(self):
        assert np.abs(project_fantope(-np.eye(4), 2)).max() == 0.0

    def test_K_bounds_checked(self):
        with pytest.raises(ValueError):
            project_fantope(np.eye(3), 0)
        with pytest.raises(ValueError):
            project_fantope(np.eye(3), 4)

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 1000))
    def test_feasibility(self, d, K, seed):
        K = min(K, d)
        W = random_symmetric(np.random.default_rng(seed), d, scale=2.0)
        H = project_fantope(W, K)
        w = np.linalg.eigvalsh(H)
        assert w.min() >= -1e-10
        assert w.max() <= 1 + 1e-10
        assert w.sum() <= K + 1e-8

    @given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 1000))
    def test_idempotent(self, d, K, seed):
        K = min(K, d)
        W = random_symmetric(np.random.default_rng(seed), d, scale=2.0)
        H = project_fantope(W, K)
        assert np.linalg.norm(project_fantope(H, K) - H) <= 1e-9

    def test_unique_under_eigenvalue_multiplicity(self, rng):
        # repeated eigenvalues at the clipping boundary: projection is still
        # a function of W alone
        U = np.linalg.qr(rng.standard_normal((4, 4)))[0]
        W = (U * [1.5, 1.5, 0.2, 0.2]) @ U.T
        W = (W + W.T) / 2
        H1 = project_fantope(W, 2)
        H2 = project_fantope(W.copy(), 2)
        assert np.array_equal(H1, H2)
        assert np.allclose(H1, (U * [1.0, 1.0, 0.0, 0.0]) @ U.T, atol=1e-9)

    def test_symmetric_output(self, rng):
        H = project_fantope(random_symmetric(rng, 6), 2)
        assert np.array_equal(H, H.T)


@pytest.mark.slow
def test_agrees_with_convex_solver_small_d(rng):
    cp = pytest.importorskip("cvxpy")
    for _ in range(20):
        d = int(rng.integers(2, 5))
        K = int(rng.integers(1, d + 1))
        W = random_symmetric(rng, d, scale=2.0)
        H = cp.Variable((d, d), symmetric=True)
        problem = cp.Problem(
            cp.Minimize(cp.norm(H - W, "fro")),
            [H >> 0, np.eye(d) - H >> 0, cp.trace(H) <= K],
        )
        problem.solve(solver=cp.SCS, eps=1e-9, max_iters=100000)
        assert problem.status == "optimal"
        assert np.abs(project_fantope(W, K) - H.value).max() <= 1e-6
