"""Linearized ADMM for the nuclear-norm-ball, L1-penalized subspace program.

Solves

    minimize   -tr(M Pi) + rho * ||Pi||_1
    subject to ||S Pi S||_* <= K,  ||S Pi S||_sp <= 1,

with S the PSD square root of Sigma, by alternating a soft-thresholded
linearized primal step in Pi, a fantope-type projection for the auxiliary
variable H = S Pi S, and a scaled dual ascent step. The linearization step
size is tau = 4 * nu * lambda_max(Sigma)^2, which satisfies the
tau > 2 * nu * lambda_max^2 requirement for convergence.

The returned Pi is not projected to be PSD between iterations (the iteration
does not require it), so it can be slightly indefinite at finite tolerance;
consumers use its leading eigenvectors.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DivergenceError
from .fantope import project_fantope
from .linalg import (
    check_square_finite,
    clamp_psd_eigenvalues,
    soft_threshold,
    sym_eigen,
    symmetrize,
)


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs for ladmm_solve.

    rho is the elementwise L1 penalty, K the trace/rank budget of the
    constraint set, nu the ADMM step parameter, epsilon the stopping
    tolerance on the Frobenius norm of successive-Pi differences.
    """

    rho: float
    K: int
    nu: float = 1.0
    epsilon: float = 1e-4
    max_iter: int = 2000

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        if self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K}")
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class SolverState:
    """Iterates (Pi, H, Gamma) after ``iteration`` steps; reusable as a warm start."""

    Pi: np.ndarray
    H: np.ndarray
    Gamma: np.ndarray
    iteration: int = 0
    last_step_norm: float = np.inf


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one ladmm_solve call.

    ``objective_trace[t]`` is -tr(M Pi) + rho * ||Pi||_1 after iteration t+1.
    ``state`` carries the final iterates for warm-starting a nearby problem
    (e.g. the next point on a rho path).
    """

    Pi_hat: np.ndarray
    converged: bool
    iterations: int
    final_step_norm: float
    objective_trace: np.ndarray
    state: SolverState


def initial_state(d):
    """Cold-start iterates: Pi = H = I, Gamma = 0."""
    return SolverState(Pi=np.eye(d), H=np.eye(d), Gamma=np.zeros((d, d)))


def ladmm_solve(M, Sigma, cfg, init=None):
    """Run the linearized ADMM iteration to tolerance or iteration cap.

    Parameters
    ----------
    M : ndarray, shape (d, d)
        Symmetric reward matrix whose trace inner product is maximized
        (a conditional-mean or fitted-value covariance estimate).
    Sigma : ndarray, shape (d, d)
        Symmetric PSD covariate covariance defining the constraint geometry.
        Must be nonzero (the step size is proportional to lambda_max^2).
    cfg : SolverConfig
    init : SolverState, optional
        Warm-start iterates; defaults to Pi = H = I, Gamma = 0.

    Returns
    -------
    SolveReport
        ``converged`` is False when the iteration cap was reached first; the
        last iterate is still returned.

    Raises
    ------
    DivergenceError
        If an iterate becomes non-finite.
    """
    M = symmetrize(check_square_finite(M, "M"))
    Sigma = check_square_finite(Sigma, "Sigma")
    d = M.shape[0]
    if Sigma.shape != (d, d):
        raise ValueError(f"M and Sigma shapes differ: {M.shape} vs {Sigma.shape}")
    if cfg.K > d:
        raise ValueError(f"K={cfg.K} exceeds dimension d={d}")

    dec = sym_eigen(Sigma)
    w = clamp_psd_eigenvalues(dec.eigenvalues)
    lam_max = float(w[0])
    tau = 4.0 * cfg.nu * lam_max**2
    if tau == 0.0:
        raise ValueError("Sigma is identically zero; step size tau would vanish")
    S = symmetrize((dec.eigenvectors * np.sqrt(w)) @ dec.eigenvectors.T)
    Sigma = symmetrize(Sigma)

    state = init if init is not None else initial_state(d)
    Pi, H, Gamma = state.Pi, state.H, state.Gamma

    # The linearization term Sigma Pi Sigma - S (H - Gamma) S is evaluated as
    # S (S Pi S - H + Gamma) S, reusing S Pi S from the previous projection
    # step; Sigma = S S, so the two forms agree up to rounding.
    M_over_tau = M / tau
    shrink = cfg.rho / tau
    scale = cfg.nu / tau
    SPS = symmetrize(S @ Pi @ S)

    objective = []
    converged = False
    step = np.inf
    t = 0
    for t in range(1, cfg.max_iter + 1):
        lin = symmetrize(S @ (SPS - H + Gamma) @ S)
        Pi_next = soft_threshold(Pi + M_over_tau - scale * lin, shrink)
        step = float(np.linalg.norm(Pi_next - Pi))
        if not np.isfinite(step):
            raise DivergenceError(
                f"iterate became non-finite (step norm {step})", iteration=t
            )
        SPS = symmetrize(S @ Pi_next @ S)
        shifted = Gamma + SPS
        H = project_fantope(shifted, cfg.K)
        Gamma = shifted - H

        Pi = Pi_next
        objective.append(-float(np.sum(M * Pi)) + cfg.rho * float(np.sum(np.abs(Pi))))
        if step <= cfg.epsilon:
            converged = True
            break

    final = SolverState(Pi=Pi, H=H, Gamma=Gamma, iteration=t, last_step_norm=step)
    return SolveReport(
        Pi_hat=Pi,
        converged=converged,
        iterations=t,
        final_step_norm=step,
        objective_trace=np.asarray(objective),
        state=final,
    )
