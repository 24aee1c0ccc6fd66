"""Seeded data generators for the three benchmark settings, plus replicate orchestration.

Covariates are N(0, Sigma) with AR(1) covariance 0.5^|i-j|; the response
follows one of three forms, all functions of the first three or five
coordinates plus independent Gaussian noise:

    1: y = (x1+x2+x3)/sqrt(3) + 2 e          (K=1, support {1,2,3})
    2: y = 1 + exp{(x1+x2+x3)/sqrt(3)} + e   (K=1, support {1,2,3})
    3: y = (x1+x2+x3) / {0.5+(x4+x5+1.5)^2} + 0.1 e   (K=2, support {1..5})

Sampling is PCG64 (numpy default_rng) seeded per replicate; within one call
the draw order is fixed (the n-by-d standard-normal block for x first, then
the n noise variates), so a given (seed, n, d, setting) reproduces the same
dataset bit-for-bit across processes and releases pinning numpy's generator.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import toeplitz
from threadpoolctl import threadpool_limits

from .covariance import Dataset
from .exceptions import AggregateInvalidError
from .linalg import cholesky
from .metrics import orthonormal_basis


def ar1_sigma(d, phi=0.5):
    """AR(1) correlation matrix with entries phi^|i-j|; positive definite for |phi| < 1."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not abs(phi) < 1:
        raise ValueError(f"AR(1) parameter must satisfy |phi| < 1, got {phi}")
    return toeplitz(phi ** np.arange(d))


@dataclass(frozen=True)
class SimSpec:
    """One simulated dataset: setting in {1,2,3}, sample size, dimension, seed."""

    setting: int
    n: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.setting not in (1, 2, 3):
            raise ValueError(f"setting must be 1, 2 or 3, got {self.setting}")
        d_min = 5 if self.setting == 3 else 3
        if self.d < d_min:
            raise ValueError(f"setting {self.setting} needs d >= {d_min}, got {self.d}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")


@dataclass(frozen=True)
class GroundTruth:
    """True spanning directions (as stated patterns, not normalized), support, K."""

    directions: np.ndarray
    support: np.ndarray
    K: int

    def orthonormal_basis(self):
        """Orthonormal basis of the true subspace, for distance computations."""
        return orthonormal_basis(self.directions)


def _truth(setting, d):
    if setting in (1, 2):
        beta = np.zeros((d, 1))
        beta[:3, 0] = 1.0
        return GroundTruth(directions=beta, support=np.arange(3), K=1)
    B = np.zeros((d, 2))
    B[:3, 0] = 1.0
    B[3:5, 1] = 1.0
    return GroundTruth(directions=B, support=np.arange(5), K=2)


def generate(spec):
    """Draw one dataset; deterministic in spec.seed. Returns (Dataset, GroundTruth)."""
    rng = np.random.default_rng(spec.seed)
    L = cholesky(ar1_sigma(spec.d))
    X = rng.standard_normal((spec.n, spec.d)) @ L.T
    eps = rng.standard_normal(spec.n)
    lin = X[:, :3].sum(axis=1)
    if spec.setting == 1:
        y = lin / np.sqrt(3.0) + 2.0 * eps
    elif spec.setting == 2:
        y = 1.0 + np.exp(lin / np.sqrt(3.0)) + eps
    else:
        y = lin / (0.5 + (X[:, 3] + X[:, 4] + 1.5) ** 2) + 0.1 * eps
    return Dataset(y, X), _truth(spec.setting, spec.d)


@dataclass(frozen=True)
class ReplicateTable:
    """Per-replicate metric rows plus failure records.

    records hold one dict per successful replicate ('replicate', 'seed', then
    the pipeline's metric keys); failures hold (replicate, message) pairs.
    """

    records: list
    failures: list

    def metric_keys(self):
        if not self.records:
            return []
        return [k for k in self.records[0] if k not in ("replicate", "seed")]

    def values(self, key):
        return np.array([rec[key] for rec in self.records], dtype=float)

    def aggregate(self):
        """Mean and standard error per metric; SE is None for a single replicate."""
        out = {}
        for key in self.metric_keys():
            v = self.values(key)
            se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else None
            out[key] = (float(v.mean()), se)
        return out


def _one_replicate(spec, replicate, pipeline):
    rep_spec = dataclasses.replace(spec, seed=spec.seed + replicate)
    # single-threaded dense algebra inside workers so aggregates are
    # bit-identical at any parallelism degree
    with threadpool_limits(limits=1):
        try:
            data, truth = generate(rep_spec)
            metrics = pipeline(data, truth)
        except Exception as exc:  # noqa: BLE001 - recorded per-row by contract
            return replicate, rep_spec.seed, None, f"{type(exc).__name__}: {exc}"
    return replicate, rep_spec.seed, dict(metrics), None


def run_replicates(spec, R, pipeline, n_jobs=1):
    """Run R independent replicates of pipeline(data, truth) -> metric dict.

    Replicate r uses seed spec.seed + r (r = 1..R), so the result table is a
    pure function of (spec, R, pipeline) regardless of n_jobs or scheduling.
    Individual replicate failures are recorded, not raised; if 20% or more
    fail, AggregateInvalidError is raised with the collected messages.
    """
    if R < 1:
        raise ValueError(f"need at least one replicate, got R={R}")
    results = Parallel(n_jobs=n_jobs)(
        delayed(_one_replicate)(spec, r, pipeline) for r in range(1, R + 1)
    )
    records, failures = [], []
    for replicate, seed, metrics, err in results:
        if err is None:
            records.append({"replicate": replicate, "seed": seed, **metrics})
        else:
            failures.append((replicate, err))
    if len(failures) >= 0.2 * R:
        detail = "; ".join(f"rep {r}: {msg}" for r, msg in failures[:5])
        raise AggregateInvalidError(
            f"{len(failures)}/{R} replicates failed — aggregates would be "
            f"unreliable. First failures: {detail}"
        )
    return ReplicateTable(records=records, failures=failures)
