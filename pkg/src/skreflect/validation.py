"""Gaussian oracle suite for the entropy estimators.

Each case draws a random symmetric positive-definite covariance, samples from
the corresponding zero-mean Gaussian and compares the estimate with the exact
log-determinant entropy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .estimators import kde_entropy, knn_entropy
from .gauss import gaussian_entropy


@dataclass(frozen=True)
class OracleCase:
    method: str
    dim: int
    case: int
    estimate: float
    stderr: float
    exact: float
    tolerance: float = 3.0

    @property
    def z(self) -> float:
        return (self.estimate - self.exact) / self.stderr if self.stderr > 0 else np.inf

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.exact) <= self.tolerance * self.stderr


def random_spd(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random covariance ``A A^T + I/2`` with standard normal ``A``."""
    a = rng.standard_normal((d, d))
    return a @ a.T + 0.5 * np.eye(d)


def gaussian_case(seed: int, dim: int, case: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, dim, case])))
    cov = random_spd(rng, dim)
    x = rng.standard_normal((n, dim)) @ np.linalg.cholesky(cov).T
    return cov, x


def gaussian_oracle_suite(dims: Iterable[int] = (1, 2, 3, 4), n_cases: int = 20,
                          n: int = 20_000, k: int = 4, methods: Iterable[str] = ("knn", "kde"),
                          seed: int = 0, tolerance: float = 3.0) -> list[OracleCase]:
    results = []
    for dim in dims:
        for case in range(n_cases):
            cov, x = gaussian_case(seed, dim, case, n)
            exact = gaussian_entropy(cov)
            for method in methods:
                if method == "knn":
                    est = knn_entropy(x, k, seed=case)
                elif method == "kde":
                    est = kde_entropy(x, seed=case)
                else:
                    raise ValueError(f"unknown estimator {method!r}")
                results.append(OracleCase(method, dim, case, est.value, est.stderr, exact,
                                          tolerance))
    return results
