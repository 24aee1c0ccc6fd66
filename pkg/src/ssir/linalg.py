"""Dense symmetric linear-algebra primitives shared by the estimators and the solver.

All matrices are plain ``numpy.ndarray`` of shape ``(d, d)``. Routines in this
module symmetrize their output as ``(A + A.T) / 2`` so that downstream code can
rely on exact (bitwise) symmetry; IEEE addition is commutative, so the
symmetrized matrix satisfies ``S[i, j] == S[j, i]`` exactly.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NotPDError, NotPSDError, NumericalError

# Negative eigenvalues above -PSD_CLAMP_REL * max(1, lambda_max) are treated as
# rounding noise and clamped to zero; anything below signals corrupted input.
PSD_CLAMP_REL = 1e-6


def symmetrize(A):
    """Return the symmetric part ``(A + A.T) / 2`` (exactly symmetric)."""
    A = np.asarray(A, dtype=float)
    return (A + A.T) / 2.0


def check_square_finite(A, name="matrix"):
    """Validate that A is a finite square 2-d array; return it as float ndarray."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition of a symmetric matrix.

    eigenvalues are sorted in non-increasing order; column j of eigenvectors
    pairs with eigenvalues[j].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        """Return ``U diag(w) U.T``, symmetrized."""
        return symmetrize((self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T)


@dataclass(frozen=True)
class MatrixNorms:
    frobenius: float
    spectral: float
    nuclear: float
    max: float
    l1: float


def sym_eigen(A):
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    A : ndarray, shape (d, d)
        Symmetric matrix with finite entries. Input is symmetrized as
        ``(A + A.T) / 2`` before factorization.

    Returns
    -------
    EigenDecomposition

    Raises
    ------
    ValueError
        If A is not square or contains non-finite entries.
    NumericalError
        If the underlying eigensolver fails to converge.
    """
    A = symmetrize(check_square_finite(A))
    try:
        w, U = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        diag = np.diag(A)
        raise NumericalError(
            "eigendecomposition failed to converge "
            f"(dim={A.shape[0]}, fro={np.linalg.norm(A):.3e}, "
            f"diag range=[{diag.min():.3e}, {diag.max():.3e}])"
        ) from exc
    return EigenDecomposition(eigenvalues=w[::-1].copy(), eigenvectors=U[:, ::-1].copy())


def clamp_psd_eigenvalues(w):
    """Zero out eigenvalues that are negative only by rounding noise.

    Values above ``-PSD_CLAMP_REL * max(1, lambda_max)`` are clamped to zero;
    anything more negative raises ``NotPSDError`` because it signals a
    corrupted input rather than floating-point noise. ``w`` must be sorted
    non-increasing (as produced by sym_eigen).
    """
    w = np.asarray(w, dtype=float)
    lam_max = w[0] if w.size else 0.0
    floor = -PSD_CLAMP_REL * max(1.0, lam_max)
    if w.size and w[-1] < floor:
        raise NotPSDError(
            f"matrix is not positive semidefinite: min eigenvalue {w[-1]:.6e} "
            f"below clamp threshold {floor:.6e}"
        )
    return np.maximum(w, 0.0)


def sqrt_psd(A):
    """Symmetric PSD square root ``U max(w, 0)^{1/2} U.T``.

    Eigenvalues slightly negative from rounding are clamped to zero via
    ``clamp_psd_eigenvalues``; genuinely indefinite input raises
    ``NotPSDError``.
    """
    dec = sym_eigen(A)
    root = np.sqrt(clamp_psd_eigenvalues(dec.eigenvalues))
    return symmetrize((dec.eigenvectors * root) @ dec.eigenvectors.T)


def soft_threshold(A, b):
    """Elementwise soft-thresholding ``sign(A) * max(|A| - b, 0)``.

    Preserves symmetry of the input. ``b`` must be nonnegative.
    """
    if b < 0:
        raise ValueError(f"soft-threshold level must be nonnegative, got {b}")
    A = np.asarray(A, dtype=float)
    return np.sign(A) * np.maximum(np.abs(A) - b, 0.0)


def norms(A):
    """Frobenius, spectral, nuclear, max and elementwise-l1 norms of a symmetric matrix.

    Spectral and nuclear norms are computed from the eigenvalues (valid for
    symmetric input); for PSD matrices the nuclear norm equals the trace.
    """
    A = symmetrize(check_square_finite(A))
    w = np.linalg.eigvalsh(A)
    return MatrixNorms(
        frobenius=float(np.linalg.norm(A)),
        spectral=float(np.max(np.abs(w))),
        nuclear=float(np.sum(np.abs(w))),
        max=float(np.max(np.abs(A))),
        l1=float(np.sum(np.abs(A))),
    )


def cholesky(A):
    """Lower-triangular Cholesky factor L with ``L @ L.T == A``.

    Raises
    ------
    NotPDError
        If A is not positive definite.
    """
    A = symmetrize(check_square_finite(A))
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPDError("matrix is not positive definite") from exc
