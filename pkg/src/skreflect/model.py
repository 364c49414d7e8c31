"""Reflection channel model and seeded Monte Carlo sampling.

Alice and Bob exchange a unit training symbol over reciprocal (but not
necessarily identical) channels. Their antennas re-radiate a fraction
``alpha`` of what they receive, and Eve picks up that re-radiation through
her own channels. With ``x = 1`` the four observations are::

    y_A  = h_BA + z_A
    y_B  = h_AB + z_B
    y_E3 = alpha * h_BA * h_AE + z_E3
    y_E4 = alpha * h_AB * h_BE + z_E4

All noises are i.i.d. N(0, 1). ``(h_BA, h_AB)`` and ``(h_AE, h_BE)`` are
independent zero-mean Gaussian pairs with variances ``sigma2`` and
``sigma2_e`` and correlations ``rho_ab`` and ``rho_e``. Everything is real.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

OBSERVATIONS = ("y_A", "y_B", "y_E3", "y_E4")

# child streams of the root SeedSequence, one per column group
_LEGIT_STREAM, _EVE_STREAM, _NOISE_STREAM = 0, 1, 2


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the reflection channel model.

    ``sigma2`` is the variance of the legitimate channels, which is also the
    SNR at Alice and Bob. ``sigma2_e`` is the variance of Eve's channels.
    Zero variances are accepted as degenerate limits.
    """

    sigma2: float
    sigma2_e: float = 1.0
    rho_ab: float = 0.9
    rho_e: float = 0.1
    alpha: float = 0.05

    def __post_init__(self):
        for name in ("sigma2", "sigma2_e", "rho_ab", "rho_e", "alpha"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.sigma2 < 0 or self.sigma2_e < 0:
            raise ValueError("channel variances must be non-negative")
        if abs(self.rho_ab) > 1 or abs(self.rho_e) > 1:
            raise ValueError("correlation coefficients must lie in [-1, 1]")
        if abs(self.alpha) >= 1:
            raise ValueError(f"|alpha| must be < 1, got {self.alpha}")

    @classmethod
    def from_db(cls, snr_db: float, snr_eve_db: float | None = None, *,
                alpha: float = 0.05, rho_ab: float = 0.9, rho_e: float = 0.1,
                sigma2_e: float | None = None) -> "ModelParams":
        """Build parameters from dB-scaled SNRs.

        Exactly one of ``snr_eve_db`` and ``sigma2_e`` must be given. Eve's
        SNR fixes ``sigma2_e = snr_eve / (alpha**2 * snr)``.
        """
        if (snr_eve_db is None) == (sigma2_e is None):
            raise ValueError("give exactly one of snr_eve_db and sigma2_e")
        sigma2 = 10.0 ** (snr_db / 10.0)
        if sigma2_e is None:
            if alpha == 0:
                raise ValueError("snr_eve_db is undefined for alpha = 0")
            sigma2_e = 10.0 ** (snr_eve_db / 10.0) / (alpha**2 * sigma2)
        return cls(sigma2=sigma2, sigma2_e=sigma2_e, rho_ab=rho_ab,
                   rho_e=rho_e, alpha=alpha)

    def replace(self, **changes) -> "ModelParams":
        values = {k: getattr(self, k) for k in
                  ("sigma2", "sigma2_e", "rho_ab", "rho_e", "alpha")}
        values.update(changes)
        return ModelParams(**values)


def derived_snrs(params: ModelParams) -> tuple[float, float]:
    """Return the linear ``(snr, snr_eve)`` with ``snr_eve = alpha**2 * sigma2_e * snr``."""
    snr = params.sigma2
    return snr, params.alpha**2 * params.sigma2_e * snr


def to_db(linear: float) -> float:
    return 10.0 * math.log10(linear) if linear > 0 else -math.inf


class ChannelSample(NamedTuple):
    """Channel coefficient draws, one array entry per draw."""

    h_ba: np.ndarray
    h_ab: np.ndarray
    h_ae: np.ndarray
    h_be: np.ndarray


@dataclass(frozen=True)
class SampleBatch:
    """Immutable ``n x d`` matrix of joint observations with named columns."""

    columns: tuple[str, ...]
    data: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        columns = tuple(self.columns)
        if len(set(columns)) != len(columns):
            raise ValueError(f"duplicate column names in {columns}")
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[1] != len(columns):
            raise ValueError(
                f"data shape {data.shape} does not match {len(columns)} columns")
        if data.shape[0] < 1:
            raise ValueError("a batch needs at least one row")
        data.flags.writeable = False
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self._index(name)]

    def select(self, cols: Sequence[str]) -> np.ndarray:
        """Return the ``n x len(cols)`` projection onto ``cols``."""
        return self.data[:, [self._index(c) for c in cols]]

    def _index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise KeyError(f"unknown column {name!r}; batch has {self.columns}") from None

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.data:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path: str | Path, seed: int | None = None) -> "SampleBatch":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in row] for row in reader]
        return cls(tuple(header), np.asarray(rows, dtype=float).reshape(len(rows), len(header)), seed)


def _streams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(3)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _correlated_pair(rng: np.random.Generator, n: int, var: float,
                     rho: float) -> tuple[np.ndarray, np.ndarray]:
    # always consume an (n, 2) block so draws line up across parameter values
    u = rng.standard_normal((n, 2))
    scale = math.sqrt(var)
    if abs(rho) == 1.0:
        first = scale * u[:, 0]
        return first, rho * first
    chol = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    pair = scale * (u @ chol.T)
    return pair[:, 0], pair[:, 1]


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    return n


def sample_channels(params: ModelParams, n: int, seed: int) -> ChannelSample:
    """Draw ``n`` independent channel realisations.

    The legitimate pair and the eavesdropper pair come from separate random
    streams, so they are independent by construction.
    """
    n = _check_n(n)
    streams = _streams(seed)
    h_ba, h_ab = _correlated_pair(streams[_LEGIT_STREAM], n, params.sigma2, params.rho_ab)
    h_ae, h_be = _correlated_pair(streams[_EVE_STREAM], n, params.sigma2_e, params.rho_e)
    return ChannelSample(h_ba, h_ab, h_ae, h_be)


def _noise(seed: int, n: int) -> np.ndarray:
    return _streams(seed)[_NOISE_STREAM].standard_normal((n, 4))


def _observe(alpha: float, h_ba, h_ab, h_ae, h_be, noise: np.ndarray) -> np.ndarray:
    return np.column_stack([
        h_ba + noise[:, 0],
        h_ab + noise[:, 1],
        alpha * h_ba * h_ae + noise[:, 2],
        alpha * h_ab * h_be + noise[:, 3],
    ])


def sample_observations(params: ModelParams, n: int, seed: int) -> SampleBatch:
    """Draw ``n`` rows of ``(y_A, y_B, y_E3, y_E4)`` with fresh channels per row."""
    n = _check_n(n)
    ch = sample_channels(params, n, seed)
    data = _observe(params.alpha, ch.h_ba, ch.h_ab, ch.h_ae, ch.h_be, _noise(seed, n))
    return SampleBatch(OBSERVATIONS, data, seed)


def sample_observations_given_eve_csi(params: ModelParams, h_ae: float, h_be: float,
                                      n: int, seed: int) -> SampleBatch:
    """Like :func:`sample_observations` but with Eve's coefficients held fixed.

    Conditioned on ``(h_ae, h_be)`` the observations are jointly Gaussian.
    """
    n = _check_n(n)
    ch = sample_channels(params, n, seed)
    data = _observe(params.alpha, ch.h_ba, ch.h_ab, float(h_ae), float(h_be), _noise(seed, n))
    return SampleBatch(OBSERVATIONS, data, seed)
