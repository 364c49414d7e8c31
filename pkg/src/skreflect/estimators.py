"""Nonparametric differential-entropy estimators.

Two estimators are provided:

``knn``
    Kozachenko-Leonenko k-nearest-neighbour estimator under the maximum
    norm,

        H = psi(N) - psi(k) + d log 2 + (d / N) sum_i log rho_i,

    where ``rho_i`` is the distance from point ``i`` to its k-th neighbour.
    Neighbours are found with an exact kd-tree.

``kde``
    Leave-one-out resubstitution estimate ``-(1/N) sum_i log p_{-i}(x_i)``
    with a Gaussian kernel and Silverman's rule-of-thumb bandwidth.

Both estimators first whiten the sample with its own Cholesky factor and add
back the log-determinant, so that ``h(Ax + b) = h(x) + log|det A|`` holds
for the estimates as well. For the KDE this covers any invertible ``A``; the
max-norm kNN estimate is only equivariant for lower-triangular ``A`` (which
includes per-column scaling), since a general ``A`` also rotates the
whitened sample. This matters here because the observation columns differ
in scale by orders of magnitude at high SNR.

Standard errors come from repeated 10-fold subsampling: the estimator is
re-run on each disjoint fold of size ``N / 10``, the between-fold variance
is divided by the number of folds, and the variance estimates of several
independent partitions are averaged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial import cKDTree
from scipy.special import digamma, logsumexp

from .model import SampleBatch

LN2 = math.log(2.0)
DEFAULT_K = 4
DEFAULT_FOLDS = 10
DEFAULT_REPEATS = 4
JITTER_SCALE = 1e-12
# kernel-matrix strip size; small strips stay cache resident
_KDE_BLOCK_ELEMS = 250_000

METHODS = ("knn", "kde")


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy estimate in bits with a resampling standard error."""

    value: float
    stderr: float
    method: str
    n: int
    hyper: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError(f"stderr must be non-negative, got {self.stderr}")


def _as_matrix(data) -> np.ndarray:
    x = data.data if isinstance(data, SampleBatch) else np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected an (n, d) sample matrix, got shape {x.shape}")
    return x


def whiten(x: np.ndarray) -> tuple[np.ndarray, float]:
    """Return ``(z, logdet)`` with ``z`` having identity sample covariance.

    ``logdet`` is ``log|det L|`` (nats) for the Cholesky factor ``L`` of the
    sample covariance, so that ``h(x) = h(z) + logdet``.
    """
    xc = x - x.mean(axis=0)
    cov = np.atleast_2d(np.cov(xc, rowvar=False))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("sample covariance is singular; columns are degenerate") from None
    z = solve_triangular(chol, xc.T, lower=True).T
    return z, float(np.log(np.diag(chol)).sum())


def knn_nats(x: np.ndarray, k: int = DEFAULT_K, jitter_seed: int = 0) -> float:
    """Point estimate (nats) of the Kozachenko-Leonenko estimator."""
    n, d = x.shape
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    z, logdet = whiten(x)
    rho = _kth_neighbor_distance(z, k)
    if np.any(rho == 0.0):
        rng = np.random.Generator(np.random.Philox(jitter_seed))
        z = z + JITTER_SCALE * rng.standard_normal(z.shape)
        rho = _kth_neighbor_distance(z, k)
        if np.any(rho == 0.0):
            raise ValueError("more than k coincident points survive jitter")
    h = digamma(n) - digamma(k) + d * LN2 + d * np.log(rho).mean()
    return float(h + logdet)


def _kth_neighbor_distance(z: np.ndarray, k: int) -> np.ndarray:
    tree = cKDTree(z)
    dist, _ = tree.query(z, k=k + 1, p=np.inf)
    return dist[:, k]


def silverman_factor(n: int, d: int) -> float:
    """Silverman's rule for unit-variance data: ``(4 / (d + 2))^(1/(d+4)) n^(-1/(d+4))``."""
    return (4.0 / (d + 2.0)) ** (1.0 / (d + 4.0)) * n ** (-1.0 / (d + 4.0))


def kde_nats(x: np.ndarray, bandwidth="silverman") -> float:
    """Point estimate (nats) of the leave-one-out resubstitution KDE entropy.

    A numeric ``bandwidth`` is measured in whitened (unit-variance) units.
    """
    n, d = x.shape
    if n < 2:
        raise ValueError("kde needs at least two points")
    z, logdet = whiten(x)
    h = _resolve_bandwidth(bandwidth, n, d)
    sums = _loo_kernel_sums(z, 0.5 / h**2)
    with np.errstate(divide="ignore"):
        log_sums = np.log(sums)
    # isolated points: every other kernel underflowed, redo in log space
    for i in np.flatnonzero(sums <= 0.0):
        d2 = -0.5 / h**2 * ((z - z[i]) ** 2).sum(axis=1)
        d2[i] = -np.inf
        log_sums[i] = logsumexp(d2)
    log_norm = math.log(n - 1) + d * math.log(h) + 0.5 * d * math.log(2.0 * math.pi)
    return float(log_norm - log_sums.mean() + logdet)


def _loo_kernel_sums(z: np.ndarray, inv2h2: float) -> np.ndarray:
    """``sum_{j != i} exp(-|z_i - z_j|^2 inv2h2)`` for every ``i``.

    Each unordered pair is evaluated once: a strip of rows is paired with all
    later rows and the strip's kernel values are credited to both sides.
    """
    n = z.shape[0]
    sq_norm = np.einsum("ij,ij->i", z, z)
    out = np.zeros(n)
    step = max(16, _KDE_BLOCK_ELEMS // n)
    for i0 in range(0, n, step):
        i1 = min(i0 + step, n)
        kern = sq_norm[i0:i1, None] + sq_norm[None, i0:] - 2.0 * (z[i0:i1] @ z[i0:].T)
        np.maximum(kern, 0.0, out=kern)
        kern *= -inv2h2
        np.exp(kern, out=kern)
        # drop the diagonal and the lower triangle of the strip's own block
        kern[:, : i1 - i0] = np.triu(kern[:, : i1 - i0], 1)
        out[i0:i1] += kern.sum(axis=1)
        out[i0:] += kern.sum(axis=0)
    return out


def _resolve_bandwidth(bandwidth, n: int, d: int) -> float:
    if isinstance(bandwidth, str):
        if bandwidth != "silverman":
            raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
        return silverman_factor(n, d)
    h = float(bandwidth)
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    return h


def subsample_stderr(point: Callable[[np.ndarray], float], x: np.ndarray, seed: int,
                     n_folds: int = DEFAULT_FOLDS, n_repeats: int = DEFAULT_REPEATS) -> float:
    """Standard error of ``point(x)`` from repeated disjoint-fold subsampling."""
    n = x.shape[0]
    if n_folds < 2 or n // n_folds < 2:
        return 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    variances = []
    for _ in range(n_repeats):
        folds = np.array_split(rng.permutation(n), n_folds)
        values = [point(x[idx]) for idx in folds]
        variances.append(np.var(values, ddof=1) / n_folds)
    return float(math.sqrt(np.mean(variances)))


def knn_entropy(data, k: int = DEFAULT_K, *, seed: int = 0, n_folds: int = DEFAULT_FOLDS,
                n_repeats: int = DEFAULT_REPEATS) -> EntropyEstimate:
    """Kozachenko-Leonenko entropy estimate in bits.

    Parameters
    ----------
    data : SampleBatch or array_like, shape (n, d)
    k : int
        Neighbour order; requires ``n > k``.
    seed : int
        Seeds the fold permutation and the tie-breaking jitter.
    n_folds, n_repeats : int
        Subsampling layout for the standard error.

    Returns
    -------
    EntropyEstimate
    """
    x = _as_matrix(data)
    k = int(k)
    if not 1 <= k < x.shape[0]:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={x.shape[0]}")
    value = knn_nats(x, k, seed) / LN2
    fold_k = min(k, x.shape[0] // n_folds - 1)
    stderr = subsample_stderr(lambda xs: knn_nats(xs, fold_k, seed) / LN2, x, seed,
                              n_folds, n_repeats)
    return EntropyEstimate(value, stderr, "knn", x.shape[0], {"k": k})


def kde_entropy(data, bandwidth="silverman", *, seed: int = 0, n_folds: int = DEFAULT_FOLDS,
                n_repeats: int = DEFAULT_REPEATS) -> EntropyEstimate:
    """Leave-one-out Gaussian-kernel resubstitution entropy estimate in bits.

    Cost is quadratic in the sample size.
    """
    x = _as_matrix(data)
    if x.shape[0] < 10:
        raise ValueError(f"kde needs at least 10 samples, got {x.shape[0]}")
    _resolve_bandwidth(bandwidth, x.shape[0], x.shape[1])
    value = kde_nats(x, bandwidth) / LN2
    stderr = subsample_stderr(lambda xs: kde_nats(xs, bandwidth) / LN2, x, seed,
                              n_folds, n_repeats)
    return EntropyEstimate(value, stderr, "kde", x.shape[0], {"bandwidth": bandwidth})


def estimate_joint_entropy(batch: SampleBatch, cols: Sequence[str], method: str = "knn",
                           hyper: dict | None = None, *, seed: int | None = None) -> EntropyEstimate:
    """Entropy of the ``cols`` projection of ``batch`` with the chosen estimator.

    ``hyper`` holds ``k`` for knn or ``bandwidth`` for kde, plus optional
    ``n_folds``/``n_repeats``. The seed defaults to the batch seed.
    """
    hyper = dict(hyper or {})
    x = batch.select(cols)
    if seed is None:
        seed = batch.seed if batch.seed is not None else 0
    resampling = {key: hyper.pop(key) for key in ("n_folds", "n_repeats") if key in hyper}
    if method == "knn":
        est = knn_entropy(x, hyper.pop("k", DEFAULT_K), seed=seed, **resampling)
    elif method == "kde":
        est = kde_entropy(x, hyper.pop("bandwidth", "silverman"), seed=seed, **resampling)
    else:
        raise ValueError(f"unknown estimator {method!r}; choose from {METHODS}")
    if hyper:
        raise TypeError(f"unused estimator options {sorted(hyper)}")
    return EntropyEstimate(est.value, est.stderr, est.method, est.n,
                           {**est.hyper, "cols": tuple(cols)})


def estimate_mi(batch: SampleBatch, part_a: Sequence[str], part_b: Sequence[str],
                method: str = "knn", hyper: dict | None = None, *,
                seed: int | None = None) -> EntropyEstimate:
    """``I(A; B) = h(A) + h(B) - h(A, B)`` from three entropy estimates, in bits.

    The standard error resamples the whole difference, so correlation
    between the three terms is accounted for.
    """
    hyper = dict(hyper or {})
    n_folds = hyper.pop("n_folds", DEFAULT_FOLDS)
    n_repeats = hyper.pop("n_repeats", DEFAULT_REPEATS)
    if seed is None:
        seed = batch.seed if batch.seed is not None else 0
    if method == "knn":
        k = hyper.pop("k", DEFAULT_K)

        def point(x, k=k):
            return knn_nats(x, k, seed)
    elif method == "kde":
        bandwidth = hyper.pop("bandwidth", "silverman")

        def point(x):
            return kde_nats(x, bandwidth)
    else:
        raise ValueError(f"unknown estimator {method!r}; choose from {METHODS}")
    if hyper:
        raise TypeError(f"unused estimator options {sorted(hyper)}")
    if set(part_a) & set(part_b):
        raise ValueError("partitions overlap")
    x = batch.select(list(part_a) + list(part_b))
    na = len(part_a)

    def mi(xs):
        return (point(xs[:, :na]) + point(xs[:, na:]) - point(xs)) / LN2

    stderr = subsample_stderr(mi, x, seed, n_folds, n_repeats)
    return EntropyEstimate(mi(x), stderr, method, x.shape[0],
                           {"parts": (tuple(part_a), tuple(part_b))})
