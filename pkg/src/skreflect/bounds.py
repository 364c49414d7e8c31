"""Upper and lower bounds on the secret-key rate.

For observations ``X = y_A``, ``Y = y_B`` and Eve's view ``Z``:

* upper bound ``I(X; Y | Z)``
* lower bound ``I(X; Y) - min(I(X; Z), I(Y; Z))``

``y_A`` and ``y_B`` are identically distributed, so the minimum collapses to
``I(X; Z)``.

Three regimes are supported. ``no_eve`` is the closed-form capacity when Eve
sees nothing. ``no_csie`` (Eve does not know her own channels) leaves
non-Gaussian joints that are estimated from samples. ``full_csie`` (Eve
knows ``h_AE`` and ``h_BE``) is Gaussian per channel realisation and is
averaged over Eve's channels by Monte Carlo.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import estimators
from .gauss import (CovarianceMatrix, build_conditional_covariance,
                    conditional_covariance_entries, conditional_mi_stack, gaussian_conditional_mi,
                    gaussian_entropy, gaussian_mi, sk_capacity_no_eve)
from .model import (OBSERVATIONS, ModelParams, SampleBatch, derived_snrs, sample_channels,
                    sample_observations, sample_observations_given_eve_csi, to_db)

log = logging.getLogger(__name__)

REGIMES = ("no_eve", "no_csie", "full_csie")
EVE = ("y_E3", "y_E4")
DEFAULT_N_SAMPLES = 100_000
DEFAULT_N_DRAWS = 1_000
# fewer stderr partitions than the estimator default: four terms per point
BOUNDS_FOLD_REPEATS = 2
WORKERS_ENV = "SKREFLECT_WORKERS"


@dataclass(frozen=True)
class BoundEstimate:
    """Lower/upper secret-key-rate bounds in bits per channel use."""

    lower: float
    lower_stderr: float
    upper: float
    upper_stderr: float
    regime: str
    params: ModelParams
    diagnostics: dict = field(default_factory=dict)

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lower_stderr, self.upper_stderr)

    def to_record(self) -> dict:
        """Flat record with every parameter, rate and diagnostic counter."""
        snr, snr_eve = derived_snrs(self.params)
        d = self.diagnostics
        return {
            "snr_db": to_db(snr),
            "snr_eve_db": to_db(snr_eve),
            **asdict(self.params),
            "regime": self.regime,
            "lower_bits": self.lower,
            "lower_stderr": self.lower_stderr,
            "upper_bits": self.upper,
            "upper_stderr": self.upper_stderr,
            "method": d.get("method", ""),
            "n": d.get("n", 0),
            "seed": d.get("seed", ""),
            "clamp_count": d.get("clamp_count", 0),
            "error": d.get("error", ""),
        }


def _rss(*stderrs: float) -> float:
    return math.sqrt(sum(s * s for s in stderrs))


def _clamp(value: float) -> tuple[float, int]:
    return (0.0, 1) if value < 0 else (value, 0)


def bounds_no_eve(params: ModelParams) -> BoundEstimate:
    c = sk_capacity_no_eve(params)
    return BoundEstimate(c, 0.0, c, 0.0, "no_eve", params,
                         {"method": "exact", "n": 0, "clamp_count": 0})


def bounds_no_csie(params: ModelParams, n: int = DEFAULT_N_SAMPLES, seed: int = 0,
                   method: str = "knn", hyper: dict | None = None,
                   debug: bool = False) -> BoundEstimate:
    """Estimator-based bounds when Eve does not know her channels.

    The upper bound is ``h(A,E) + h(B,E) - h(A,B,E) - h(E)`` with every term
    estimated. The lower bound is ``h(B) - h(A,B) - h(E) + h(A,E)`` where the
    two legitimate-only terms are exactly Gaussian and use closed forms.
    ``E`` stands for ``(y_E3, y_E4)``. Term standard errors are combined in
    quadrature.

    With ``debug`` the lower bound is also evaluated with ``y_B`` in place of
    ``y_A`` in the leakage term; the two must agree by symmetry, and the
    z-score of their difference is stored in the diagnostics.
    """
    n = int(n)
    if n < 1000:
        raise ValueError(f"no-CSIE bounds need n >= 1000 samples, got {n}")
    batch = sample_observations(params, n, seed)
    return bounds_from_batch(batch, params, method, hyper, seed=seed, debug=debug)


def bounds_from_batch(batch: SampleBatch, params: ModelParams, method: str = "knn",
                      hyper: dict | None = None, *, seed: int = 0, debug: bool = False,
                      regime: str = "no_csie") -> BoundEstimate:
    """Estimate both bounds from an observation batch (see :func:`bounds_no_csie`).

    ``params`` supplies the closed-form legitimate terms, which do not depend
    on Eve's channels, so the same routine also handles batches drawn with
    Eve's coefficients held fixed.
    """
    hyper = {"n_repeats": BOUNDS_FOLD_REPEATS, **(hyper or {})}

    def est(cols):
        try:
            return estimators.estimate_joint_entropy(batch, cols, method, hyper, seed=seed)
        except Exception as exc:
            raise RuntimeError(f"estimating h({', '.join(cols)}) failed: {exc}") from exc

    h_ae = est(("y_A",) + EVE)
    h_be = est(("y_B",) + EVE)
    h_abe = est(("y_A", "y_B") + EVE)
    h_e = est(EVE)
    legit = _legit_covariance(params)
    h_b = gaussian_entropy(legit.sub(["y_B"]))
    h_ab = gaussian_entropy(legit)

    upper = h_ae.value + h_be.value - h_abe.value - h_e.value
    upper_se = _rss(h_ae.stderr, h_be.stderr, h_abe.stderr, h_e.stderr)
    lower = h_b - h_ab - h_e.value + h_ae.value
    lower_se = _rss(h_e.stderr, h_ae.stderr)

    terms = {"h(y_A,E)": h_ae, "h(y_B,E)": h_be, "h(y_A,y_B,E)": h_abe, "h(E)": h_e}
    diagnostics = {
        "method": method,
        "n": batch.n,
        "seed": seed,
        "policy": "hybrid: h(y_B), h(y_A,y_B) closed form; joints with Eve estimated",
        "hyper": {k: v for k, v in h_ae.hyper.items() if k != "cols"},
        "terms": {name: (t.value, t.stderr) for name, t in terms.items()},
        "lower_raw": lower,
        "upper_raw": upper,
    }
    if debug:
        # h(y_A) = h(y_B), so the y_B version differs only in the estimated joint
        lower_b = h_b - h_ab - h_e.value + h_be.value
        z = (lower - lower_b) / max(_rss(h_ae.stderr, h_be.stderr), 1e-300)
        diagnostics["symmetry_z"] = z
        if abs(z) > 3:
            log.warning("lower bound asymmetry at %s: z = %.2f", params, z)

    lower, c1 = _clamp(lower)
    upper, c2 = _clamp(upper)
    diagnostics["clamp_count"] = c1 + c2
    return BoundEstimate(lower, lower_se, upper, upper_se, regime, params, diagnostics)


def _legit_covariance(params: ModelParams) -> CovarianceMatrix:
    s2 = params.sigma2
    return CovarianceMatrix(("y_A", "y_B"), [[s2 + 1.0, params.rho_ab * s2],
                                             [params.rho_ab * s2, s2 + 1.0]])


def exact_bounds_given_eve_csi(params: ModelParams, h_ae: float, h_be: float) -> tuple[float, float]:
    """Exact ``(lower, upper)`` for one fixed realisation of Eve's channels."""
    cov = build_conditional_covariance(params, h_ae, h_be)
    upper = gaussian_conditional_mi(cov, ["y_A"], ["y_B"], list(EVE))
    lower = gaussian_mi(cov, ["y_A"], ["y_B"]) - gaussian_mi(cov, ["y_A"], list(EVE))
    return lower, upper


def estimated_bounds_given_eve_csi(params: ModelParams, h_ae: float, h_be: float,
                                   n: int = DEFAULT_N_SAMPLES, seed: int = 0,
                                   method: str = "knn", hyper: dict | None = None) -> BoundEstimate:
    """Estimator pipeline run on samples drawn with Eve's channels held fixed.

    The lower bound is left unclamped (``lower_raw`` in the diagnostics is
    the same number) so it can be compared with the exact value, which may
    be negative.
    """
    batch = sample_observations_given_eve_csi(params, h_ae, h_be, n, seed)
    est = bounds_from_batch(batch, params, method, hyper, seed=seed, regime="fixed_eve_csi")
    d = est.diagnostics
    return BoundEstimate(d["lower_raw"], est.lower_stderr, d["upper_raw"], est.upper_stderr,
                         est.regime, params, d)


def bounds_full_csie(params: ModelParams, n_channel_draws: int = DEFAULT_N_DRAWS,
                     seed: int = 0) -> BoundEstimate:
    """Bounds when Eve knows ``h_AE`` and ``h_BE``.

    Given Eve's channels the observations are Gaussian, so both bounds are
    exact per draw::

        upper = E_h[ I(y_A; y_B | y_E3, y_E4, h) ]
        lower = I(y_A; y_B) - E_h[ I(y_A; y_E3, y_E4 | h) ]

    The expectation over ``h`` is a plain Monte Carlo average; the reported
    standard errors are those of the averages.
    """
    n_channel_draws = int(n_channel_draws)
    if n_channel_draws < 100:
        raise ValueError(f"need at least 100 channel draws, got {n_channel_draws}")
    ch = sample_channels(params, n_channel_draws, seed)
    covs = conditional_covariance_entries(params, ch.h_ae, ch.h_be)
    secret = conditional_mi_stack(OBSERVATIONS, covs, ["y_A"], ["y_B"], list(EVE))
    leak = conditional_mi_stack(OBSERVATIONS, covs, ["y_A"], list(EVE))
    capacity = sk_capacity_no_eve(params)

    root_n = math.sqrt(n_channel_draws)
    upper = float(secret.mean())
    upper_se = float(secret.std(ddof=1)) / root_n
    lower = capacity - float(leak.mean())
    lower_se = float(leak.std(ddof=1)) / root_n
    diagnostics = {"method": "exact", "n": n_channel_draws, "seed": seed,
                   "lower_raw": lower, "upper_raw": upper}
    lower, clamped = _clamp(lower)
    diagnostics["clamp_count"] = clamped
    return BoundEstimate(lower, lower_se, upper, upper_se, "full_csie", params, diagnostics)


def point_seed(base_seed: int, params: ModelParams, common_random_numbers: bool = True) -> int:
    """Seed used for one grid point.

    With common random numbers every point reuses ``base_seed``, so all
    points are driven by the same underlying normal variates and differences
    between neighbouring points are not swamped by sampling noise. Otherwise
    the seed is hashed from ``base_seed`` and the exact parameter values, so
    identical parameters always give identical results.
    """
    if common_random_numbers:
        return int(base_seed)
    payload = struct.pack("<q5d", int(base_seed), params.sigma2, params.sigma2_e,
                          params.rho_ab, params.rho_e, params.alpha)
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def evaluate(params: ModelParams, regime: str, seed: int = 0, *,
             n_samples: int = DEFAULT_N_SAMPLES, n_channel_draws: int = DEFAULT_N_DRAWS,
             method: str = "knn", hyper: dict | None = None) -> BoundEstimate:
    """Evaluate one parameter point in ``regime``."""
    if regime == "no_eve":
        return bounds_no_eve(params)
    if regime == "no_csie":
        return bounds_no_csie(params, n_samples, seed, method, hyper)
    if regime == "full_csie":
        return bounds_full_csie(params, n_channel_draws, seed)
    raise ValueError(f"unknown regime {regime!r}; choose from {REGIMES}")


def _evaluate_point(args) -> BoundEstimate:
    params, regime, seed, kwargs = args
    try:
        est = evaluate(params, regime, seed, **kwargs)
        est.diagnostics.setdefault("seed", seed)
        return est
    except Exception as exc:
        log.error("grid point %s failed: %s", params, exc)
        nan = float("nan")
        method = kwargs.get("method", "knn") if regime == "no_csie" else "exact"
        return BoundEstimate(nan, nan, nan, nan, regime, params,
                             {"method": method, "seed": seed, "error": f"{type(exc).__name__}: {exc}"})


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def sweep(params_grid: Sequence[ModelParams], regime: str, *, seed: int = 0,
          n_samples: int = DEFAULT_N_SAMPLES, n_channel_draws: int = DEFAULT_N_DRAWS,
          method: str = "knn", hyper: dict | None = None,
          common_random_numbers: bool = True, workers: int | None = None) -> list[BoundEstimate]:
    """Evaluate every grid point; results keep the order of ``params_grid``.

    A failing point yields a NaN estimate with the error in its diagnostics
    instead of aborting the sweep. ``workers`` defaults to the
    ``SKREFLECT_WORKERS`` environment variable (1 if unset).
    """
    grid = list(params_grid)
    if not grid:
        raise ValueError("parameter grid is empty")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; choose from {REGIMES}")
    kwargs = {"n_samples": n_samples, "n_channel_draws": n_channel_draws,
              "method": method, "hyper": hyper}
    jobs = [(p, regime, point_seed(seed, p, common_random_numbers), kwargs) for p in grid]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_point, jobs))
    results = []
    for i, job in enumerate(jobs, 1):
        results.append(_evaluate_point(job))
        log.info("%s point %d/%d done", regime, i, len(jobs))
    return results
