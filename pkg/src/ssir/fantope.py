"""Projection onto {H PSD : nuclear norm <= K, spectral norm <= 1}.

The Frobenius projection of a symmetric W onto this set keeps W's
eigenvectors and replaces each eigenvalue w by min(1, max(w - gamma*, 0)),
where gamma* is the smallest nonnegative shift making the clipped values sum
to at most K. The shift is found exactly: the map gamma -> sum of clipped
values is piecewise linear and non-increasing with breakpoints at {w_j} and
{w_j - 1}, so one pass over the sorted breakpoints inverts it.

Signed eigenvalues are used (not singular values): the feasible set is PSD,
so negative directions clip to zero rather than flipping sign.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import sym_eigen, symmetrize


@dataclass(frozen=True)
class ClipSolution:
    """Result of the clipped-eigenvalue subproblem."""

    gamma_star: float
    clipped_values: np.ndarray
    achieved_trace: float


def _clip_sum(omega, gamma):
    return float(np.minimum(1.0, np.maximum(omega - gamma, 0.0)).sum())


def solve_gamma(omega, K):
    """Smallest gamma >= 0 with sum_j min(1, max(omega_j - gamma, 0)) <= K.

    Exact piecewise-linear inversion over the breakpoints {omega_j,
    omega_j - 1}; no iterative tolerance. Any real omega is accepted
    (negative entries are inert).
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    omega = np.asarray(omega, dtype=float)

    def solution(gamma):
        clipped = np.minimum(1.0, np.maximum(omega - gamma, 0.0))
        return ClipSolution(gamma, clipped, float(clipped.sum()))

    if _clip_sum(omega, 0.0) <= K:
        return solution(0.0)
    bps = np.unique(np.concatenate([omega, omega - 1.0]))
    bps = np.concatenate([[0.0], bps[bps > 0.0]])
    vals = np.array([_clip_sum(omega, b) for b in bps])
    # vals[0] > K by the early return; vals[-1] = 0 <= K, so a crossing exists
    i = int(np.argmax(vals <= K))
    if vals[i] == K:
        return solution(float(bps[i]))
    lo, hi = bps[i - 1], bps[i]
    flo, fhi = vals[i - 1], vals[i]
    gamma = lo + (flo - K) * (hi - lo) / (flo - fhi)
    return solution(float(gamma))


def project_fantope(W, K):
    """Frobenius projection of symmetric W onto the trace-K fantope-type set.

    Returns a symmetric PSD matrix with eigenvalues in [0, 1] summing to at
    most K. Idempotent; the identity on matrices already in the set.
    """
    W = np.asarray(W, dtype=float)
    if not 1 <= K <= W.shape[0]:
        raise ValueError(f"need 1 <= K <= d={W.shape[0]}, got K={K}")
    decomp = sym_eigen(symmetrize(W))
    clip = solve_gamma(decomp.eigenvalues, K)
    U = decomp.eigenvectors
    return symmetrize((U * clip.clipped_values) @ U.T)
