"""Covariance-type estimators feeding the optimization.

Three inputs drive the sparse subspace program: the sample covariance of the
covariates, an estimate of the expected conditional covariance of x given y
(two constructions: consecutive concomitant differences, or within-slice
covariances), and for the fitted-components variant the covariance of fitted
values from regressing x on a basis expansion of y.

All estimators use 1/n normalization throughout so that the two paths stay
mutually consistent.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import CollinearBasisError
from .linalg import symmetrize

GRAM_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class Dataset:
    """Paired observations (y_i, x_i), y length n, X of shape (n, d)."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-d, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("y must be 1-d with one entry per row of X")
        if X.shape[0] < 2:
            raise ValueError("need at least 2 observations")
        if X.shape[1] < 1:
            raise ValueError("need at least 1 covariate")
        if not (np.isfinite(y).all() and np.isfinite(X).all()):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def subset(self, idx):
        """Dataset restricted to the given row indices (pairing preserved)."""
        idx = np.asarray(idx)
        return Dataset(self.y[idx], self.X[idx])


@dataclass(frozen=True)
class BasisSpec:
    """Basis expansion of the response: raw polynomial or slice indicators.

    ``order`` is the polynomial degree or the slice count. For the
    fitted-components estimator the subspace dimension K must satisfy
    K < order.
    """

    kind: str = "polynomial"
    order: int = 3

    def __post_init__(self):
        if self.kind not in ("polynomial", "slice-indicator"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.order < 1:
            raise ValueError("basis order must be >= 1")


def order_by_response(y):
    """Indices sorting y ascending; ties keep original input order (stable)."""
    return np.argsort(y, kind="stable")


def slice_partition(n, H):
    """Split range(n) into H contiguous slices with sizes differing by <= 1.

    The first ``n % H`` slices get the extra point.
    """
    if not 1 <= H <= n:
        raise ValueError(f"slice count must be in [1, n]={[1, n]}, got {H}")
    return np.array_split(np.arange(n), H)


def sample_cov(X):
    """Centered sample covariance with 1/n normalization; symmetric PSD."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("sample covariance needs at least 2 observations")
    Xc = X - X.mean(axis=0)
    return symmetrize(Xc.T @ Xc / n)


def diff_estimator_T(data):
    """Pairwise-difference estimator of the expected conditional covariance.

    Sorts observations by y, pairs consecutive concomitants (x paired with
    the 2i-1st and 2i-th order statistics of y), and averages outer products
    of within-pair differences with weight 1/n. For odd n the last unpaired
    observation is dropped.

    Returns a symmetric PSD (d, d) matrix.
    """
    order = order_by_response(data.y)
    Xs = data.X[order]
    m = data.n // 2
    diffs = Xs[1 : 2 * m : 2] - Xs[0 : 2 * m : 2]
    return symmetrize(diffs.T @ diffs / data.n)


def slice_estimator_T(data, H):
    """Slice estimator: equal-weight average of within-slice covariances.

    Observations are partitioned by y order statistics into H contiguous
    slices (sizes differ by at most one, larger slices first). Each slice
    contributes its 1/n_h-normalized covariance; slices of size one
    contribute zero. The result is the 1/H average, symmetric PSD.
    """
    if H > data.n:
        raise ValueError(f"cannot form {H} slices from {data.n} observations")
    order = order_by_response(data.y)
    T = np.zeros((data.d, data.d))
    for part in slice_partition(data.n, H):
        Xs = data.X[order[part]]
        Xs = Xs - Xs.mean(axis=0)
        T += Xs.T @ Xs / len(part)
    return symmetrize(T / H)


def conditional_cov(data, method="slice", n_slices=5):
    """Estimate cov{E(x|y)} as sample_cov(X) minus a conditional-covariance estimator.

    ``method`` selects the estimator of E{cov(x|y)}: "diff" for the
    pairwise-difference form, "slice" for the within-slice form with
    ``n_slices`` slices. The result is symmetric but may be indefinite in
    finite samples; it is deliberately not clamped.
    """
    if method == "diff":
        T = diff_estimator_T(data)
    elif method == "slice":
        T = slice_estimator_T(data, n_slices)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'diff' or 'slice'")
    return sample_cov(data.X) - T


def basis_matrix(y, spec):
    """Column-centered basis expansion of the response, shape (n, order).

    Polynomial: columns y, y^2, ..., y^order, each centered.
    Slice-indicator: membership indicators of contiguous order-statistic
    slices (sizes differ by at most one), centered. Centered indicator
    columns are exactly collinear (they sum to zero); fit_cov handles that
    case behind its pseudo-inverse opt-in.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if spec.kind == "polynomial":
        F = np.column_stack([y**k for k in range(1, spec.order + 1)])
    else:
        if spec.order > n:
            raise ValueError(f"cannot form {spec.order} slices from {n} observations")
        if np.all(y == y[0]):
            warnings.warn(
                "all responses equal: slice-indicator basis is rank deficient",
                RuntimeWarning,
                stacklevel=2,
            )
        order = order_by_response(y)
        F = np.zeros((n, spec.order))
        for h, part in enumerate(slice_partition(n, spec.order)):
            F[order[part], h] = 1.0
    return F - F.mean(axis=0)


def fit_cov(data, spec, allow_pinv=False):
    """Covariance of fitted values from the linear regression of x on the basis.

    Computes ``X' F (F'F)^{-1} F' X / n`` with X row-centered and F the
    centered basis matrix. Symmetric PSD with rank at most the basis order.

    Raises ``CollinearBasisError`` when the basis Gram matrix is singular or
    its condition number exceeds 1e12, unless ``allow_pinv`` opts in to the
    pseudo-inverse (required for the slice-indicator basis, whose centered
    columns are exactly collinear).
    """
    if data.n <= spec.order:
        raise ValueError(f"need n > basis order, got n={data.n}, order={spec.order}")
    F = basis_matrix(data.y, spec)
    Xc = data.X - data.X.mean(axis=0)
    G = F.T @ F
    cond = np.linalg.cond(G)
    if cond > GRAM_CONDITION_LIMIT or not np.isfinite(cond):
        if not allow_pinv:
            raise CollinearBasisError(
                f"basis Gram matrix is numerically singular (cond={cond:.3e}); "
                "pass allow_pinv=True to project with the pseudo-inverse"
            )
        Ginv = np.linalg.pinv(G, rcond=1e-12)
    else:
        Ginv = np.linalg.inv(G)
    B = Xc.T @ F  # (d, r)
    return symmetrize(B @ Ginv @ B.T / data.n)
