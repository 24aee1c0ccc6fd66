"""Evaluation metrics: support recovery, score correlation, subspace distance."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SupportEval:
    """True/false positive rates of an estimated variable support."""

    tpr: float
    fpr: float


def support_rates(true_support, est_support, d):
    """TPR and FPR of an estimated support against the truth.

    Supports are collections of 0-based covariate indices in [0, d).
    tpr = |true ∩ est| / |true|, fpr = |est \\ true| / (d - |true|).
    The true support must be neither empty nor all of {0..d-1}, otherwise a
    rate is 0/0.
    """
    true_set = frozenset(int(j) for j in true_support)
    est_set = frozenset(int(j) for j in est_support)
    for s, label in ((true_set, "true"), (est_set, "estimated")):
        if any(not 0 <= j < d for j in s):
            raise ValueError(f"{label} support contains indices outside [0, {d})")
    if not true_set or len(true_set) == d:
        raise ValueError("true support must be nonempty and proper for defined rates")
    tpr = len(true_set & est_set) / len(true_set)
    fpr = len(est_set - true_set) / (d - len(true_set))
    return SupportEval(tpr=tpr, fpr=fpr)


def _pearson(a, b):
    a = a - a.mean()
    b = b - b.mean()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero-variance scores: correlation undefined")
    return float(a @ b / (na * nb))


def score_correlation(X, true_dirs, est_dirs):
    """Mean over true directions of the best absolute score correlation.

    For each true direction beta_k the scores X @ beta_k are compared with
    every estimated score X @ pi_j by absolute Pearson correlation on the
    sample; the maximum over j is kept and the results averaged over k.
    Direction scaling is irrelevant. Returns a value in [0, 1].
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 3:
        raise ValueError("need at least 3 observations for a correlation")
    true_scores = X @ np.atleast_2d(np.asarray(true_dirs, dtype=float).T).T
    est_scores = X @ np.atleast_2d(np.asarray(est_dirs, dtype=float).T).T
    if true_scores.ndim == 1:
        true_scores = true_scores[:, None]
    if est_scores.ndim == 1:
        est_scores = est_scores[:, None]
    best = [
        max(abs(_pearson(true_scores[:, k], est_scores[:, j]))
            for j in range(est_scores.shape[1]))
        for k in range(true_scores.shape[1])
    ]
    return float(np.mean(best))


def _check_orthonormal(U, name):
    U = np.asarray(U, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    G = U.T @ U
    dev = np.max(np.abs(G - np.eye(U.shape[1])))
    if dev > 1e-6:
        raise ValueError(f"{name} columns are not orthonormal (Gram deviation {dev:.3e})")
    return U


def subspace_distance(U, W):
    """Frobenius distance between projections onto the column spans.

    ``norm(U U' - W W')``; zero iff the spans coincide, invariant to the
    choice of orthonormal basis within each span. Both inputs must have
    orthonormal columns and the same column count.
    """
    U = _check_orthonormal(U, "U")
    W = _check_orthonormal(W, "W")
    if U.shape != W.shape:
        raise ValueError(f"basis shapes differ: {U.shape} vs {W.shape}")
    return float(np.linalg.norm(U @ U.T - W @ W.T))


def orthonormal_basis(dirs):
    """Orthonormal basis for the column span of ``dirs`` (thin QR).

    Raises if the columns are linearly dependent (rank-deficient span).
    """
    A = np.asarray(dirs, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    Q, R = np.linalg.qr(A)
    if np.min(np.abs(np.diag(R))) <= 1e-10 * max(1.0, np.max(np.abs(R))):
        raise ValueError("direction columns are linearly dependent")
    return Q
