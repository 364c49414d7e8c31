"""Closed-form entropies and mutual informations for Gaussian observations.

Once Eve's coefficients ``h_ae`` and ``h_be`` are fixed, the four
observations are jointly Gaussian and every information quantity reduces to
log-determinants of principal submatrices. All values are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import OBSERVATIONS, ModelParams

LOG2E = 1.0 / math.log(2.0)
# (1/2) log2(2 pi e): entropy of a unit-variance Gaussian
UNIT_GAUSSIAN_BITS = 0.5 * math.log2(2.0 * math.pi * math.e)
MI_CLAMP_TOL = 1e-9


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True)
class CovarianceMatrix:
    labels: tuple[str, ...]
    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        m = np.array(self.m, dtype=float, copy=True)
        if m.shape != (len(labels), len(labels)):
            raise ValueError(f"matrix shape {m.shape} does not match labels {labels}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels {labels}")
        scale = max(np.abs(m).max(), 1.0)
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("covariance matrix is not symmetric")
        m.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "m", m)

    def sub(self, labels: Sequence[str]) -> "CovarianceMatrix":
        idx = [self.index(label) for label in labels]
        return CovarianceMatrix(tuple(labels), self.m[np.ix_(idx, idx)])

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r}; have {self.labels}") from None


def conditional_covariance_entries(params: ModelParams, h_ae, h_be) -> np.ndarray:
    """Covariance of ``(y_A, y_B, y_E3, y_E4)`` given Eve's coefficients.

    ``h_ae`` and ``h_be`` may be arrays; the result then has shape
    ``(*broadcast_shape, 4, 4)``.
    """
    s2, rho, a = params.sigma2, params.rho_ab, params.alpha
    h_ae, h_be = np.broadcast_arrays(np.asarray(h_ae, float), np.asarray(h_be, float))
    out = np.empty(h_ae.shape + (4, 4))
    out[..., 0, 0] = s2 + 1.0
    out[..., 1, 1] = s2 + 1.0
    out[..., 0, 1] = out[..., 1, 0] = rho * s2
    out[..., 2, 2] = a**2 * h_ae**2 * s2 + 1.0
    out[..., 3, 3] = a**2 * h_be**2 * s2 + 1.0
    out[..., 0, 2] = out[..., 2, 0] = a * h_ae * s2
    out[..., 1, 3] = out[..., 3, 1] = a * h_be * s2
    out[..., 0, 3] = out[..., 3, 0] = a * h_be * rho * s2
    out[..., 1, 2] = out[..., 2, 1] = a * h_ae * rho * s2
    out[..., 2, 3] = out[..., 3, 2] = a**2 * h_ae * h_be * rho * s2
    return out


def build_conditional_covariance(params: ModelParams, h_ae: float, h_be: float,
                                 subset: Sequence[str] = OBSERVATIONS) -> CovarianceMatrix:
    """Exact covariance of the observations in ``subset`` given ``(h_ae, h_be)``."""
    subset = tuple(subset)
    if not subset:
        raise ValueError("subset must be nonempty")
    unknown = [s for s in subset if s not in OBSERVATIONS]
    if unknown:
        raise KeyError(f"unknown observation labels {unknown}")
    full = CovarianceMatrix(OBSERVATIONS, conditional_covariance_entries(params, h_ae, h_be))
    return full.sub(subset)


def logdet_bits(m: np.ndarray) -> np.ndarray:
    """log2 det of (a stack of) symmetric positive-definite matrices via Cholesky."""
    m = np.asarray(m, dtype=float)
    if m.shape[-1] == 0:
        return np.zeros(m.shape[:-2])
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("covariance matrix is not positive definite") from None
    diag = np.diagonal(chol, axis1=-2, axis2=-1)
    return 2.0 * np.log2(diag).sum(axis=-1)


def _entropy_from_logdet(d: int, logdet: np.ndarray) -> np.ndarray:
    return d * UNIT_GAUSSIAN_BITS + 0.5 * logdet


def gaussian_entropy(cov: CovarianceMatrix | np.ndarray) -> float:
    """Differential entropy ``(1/2) log2((2 pi e)^d det m)`` in bits."""
    m = cov.m if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)
    return float(_entropy_from_logdet(m.shape[-1], logdet_bits(m)))


def _clamp(value, what: str):
    value = np.asarray(value, dtype=float)
    if np.any(value < -MI_CLAMP_TOL):
        raise ArithmeticError(f"{what} is negative beyond round-off: {value.min():.3e}")
    return np.maximum(value, 0.0)


def _check_disjoint(*parts: Sequence[str]) -> None:
    seen: set[str] = set()
    for part in parts:
        if len(set(part)) != len(part) or seen & set(part):
            raise ValueError(f"label partitions overlap: {parts}")
        seen |= set(part)


def _index_stack(labels: list[str], parts: Sequence[str]) -> list[int]:
    unknown = [p for p in parts if p not in labels]
    if unknown:
        raise KeyError(f"unknown labels {unknown}; have {tuple(labels)}")
    return [labels.index(p) for p in parts]


def _sub_logdet(m: np.ndarray, idx: list[int]) -> np.ndarray:
    # canonical order makes I(A; B) and I(B; A) bit-identical
    idx = sorted(idx)
    return logdet_bits(m[..., idx, :][..., :, idx])


def conditional_mi_stack(labels: Sequence[str], m: np.ndarray, part_a: Sequence[str],
                         part_b: Sequence[str], part_c: Sequence[str] = ()) -> np.ndarray:
    """``I(A; B | C)`` for a stack of covariance matrices sharing ``labels``.

    The ``2 pi e`` constants cancel, leaving
    ``(1/2) [logdet(AC) + logdet(BC) - logdet(ABC) - logdet(C)]``.
    """
    _check_disjoint(part_a, part_b, part_c)
    labels = list(labels)
    a = _index_stack(labels, part_a)
    b = _index_stack(labels, part_b)
    c = _index_stack(labels, part_c)
    value = 0.5 * (_sub_logdet(m, a + c) + _sub_logdet(m, b + c)
                   - _sub_logdet(m, a + b + c) - _sub_logdet(m, c))
    return _clamp(value, "conditional mutual information")


def gaussian_mi(cov: CovarianceMatrix, part_a: Sequence[str], part_b: Sequence[str]) -> float:
    """``I(A; B) = h(A) + h(B) - h(A, B)`` in bits."""
    return float(conditional_mi_stack(cov.labels, cov.m, part_a, part_b))


def gaussian_conditional_mi(cov: CovarianceMatrix, part_a: Sequence[str],
                            part_b: Sequence[str], part_c: Sequence[str]) -> float:
    """``I(A; B | C) = h(A, C) + h(B, C) - h(A, B, C) - h(C)`` in bits."""
    return float(conditional_mi_stack(cov.labels, cov.m, part_a, part_b, part_c))


def sk_capacity_no_eve(params: ModelParams) -> float:
    """Secret-key capacity ``I(y_A; y_B)`` when Eve observes nothing.

    ``(1/2) log2[(1 + snr)^2 / ((1 + snr)^2 - rho_ab^2 snr^2)]``
    """
    snr = params.sigma2
    total = (1.0 + snr) ** 2
    # log1p keeps precision when rho_ab^2 snr^2 << (1 + snr)^2
    return -0.5 * math.log1p(-(params.rho_ab * snr) ** 2 / total) * LOG2E
