"""Run configuration for parameter sweeps.

Configs are YAML mappings. A complete example::

    regime: no_csie          # no_eve | no_csie | full_csie
    seed: 2014
    n_samples: 100000        # observation samples per point (no_csie)
    n_channel_draws: 1000    # Eve channel draws per point (full_csie)
    common_random_numbers: true
    estimator:
      method: knn            # knn | kde | both
      k: 4
      bandwidth: silverman   # or a positive number (whitened units)
    grid:
      snr_db: {start: -10, stop: 40, step: 5}   # or sigma2
      sigma2_e: 1.0                              # or snr_eve_db
      rho_ab: 0.9
      rho_e: 0.1
      alpha: 0.05
    output:
      path: fig4.csv
      format: csv            # csv | json

Every grid entry is a scalar, a list, or a range mapping with ``start``,
``stop`` (inclusive) and either ``step`` or ``num``. The grid is the
Cartesian product, iterated with the legitimate SNR outermost, then Eve's
axis, then ``rho_ab``, ``rho_e`` and ``alpha``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .bounds import DEFAULT_N_DRAWS, DEFAULT_N_SAMPLES, REGIMES
from .model import ModelParams

ESTIMATOR_METHODS = ("knn", "kde", "both")
FORMATS = ("csv", "json")
_TOP_KEYS = {"regime", "seed", "n_samples", "n_channel_draws", "common_random_numbers",
             "estimator", "grid", "output"}
_GRID_KEYS = {"snr_db", "sigma2", "snr_eve_db", "sigma2_e", "rho_ab", "rho_e", "alpha"}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    grid: dict[str, Any]
    regime: str = "no_csie"
    seed: int = 0
    n_samples: int = DEFAULT_N_SAMPLES
    n_channel_draws: int = DEFAULT_N_DRAWS
    common_random_numbers: bool = True
    estimator: dict[str, Any] = field(default_factory=lambda: {"method": "knn", "k": 4,
                                                               "bandwidth": "silverman"})
    output_path: str | None = None
    output_format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.regime not in REGIMES:
            raise ConfigError(f"regime: must be one of {REGIMES}, got {self.regime!r}")
        for name in ("n_samples", "n_channel_draws"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name}: must be a positive integer, got {value!r}")
        if self.regime == "no_csie" and self.n_samples < 1000:
            raise ConfigError(f"n_samples: no_csie needs at least 1000, got {self.n_samples}")
        if self.regime == "full_csie" and self.n_channel_draws < 100:
            raise ConfigError(f"n_channel_draws: full_csie needs at least 100, "
                              f"got {self.n_channel_draws}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        method = self.estimator.get("method", "knn")
        if method not in ESTIMATOR_METHODS:
            raise ConfigError(f"estimator.method: must be one of {ESTIMATOR_METHODS}, got {method!r}")
        k = self.estimator.get("k", 4)
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ConfigError(f"estimator.k: must be a positive integer, got {k!r}")
        bw = self.estimator.get("bandwidth", "silverman")
        if not (bw == "silverman" or (isinstance(bw, (int, float)) and bw > 0)):
            raise ConfigError(f"estimator.bandwidth: 'silverman' or a positive number, got {bw!r}")
        unknown = set(self.estimator) - {"method", "k", "bandwidth"}
        if unknown:
            raise ConfigError(f"estimator: unknown keys {sorted(unknown)}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output.format: must be one of {FORMATS}, got {self.output_format!r}")
        self.points()
        return self

    @property
    def methods(self) -> tuple[str, ...]:
        """Estimators to run; only the no-CSIE regime uses one."""
        if self.regime != "no_csie":
            return ("exact",)
        method = self.estimator.get("method", "knn")
        return ("knn", "kde") if method == "both" else (method,)

    def hyper(self, method: str) -> dict:
        if method == "knn":
            return {"k": self.estimator.get("k", 4)}
        return {"bandwidth": self.estimator.get("bandwidth", "silverman")}

    def points(self) -> list[ModelParams]:
        """Expand the grid into parameter points, validating every value."""
        grid = self.grid
        unknown = set(grid) - _GRID_KEYS
        if unknown:
            raise ConfigError(f"grid: unknown keys {sorted(unknown)}")
        legit_key = _exactly_one(grid, ("snr_db", "sigma2"), required=True)
        eve_key = _exactly_one(grid, ("snr_eve_db", "sigma2_e"),
                               required=self.regime != "no_eve")
        axes = {key: _axis(grid, key) for key in (legit_key, "rho_ab", "rho_e", "alpha")
                if key in grid or key == legit_key}
        axes[eve_key or "sigma2_e"] = _axis(grid, eve_key) if eve_key else [1.0]
        for key, default in (("rho_ab", 0.9), ("rho_e", 0.1), ("alpha", 0.05)):
            axes.setdefault(key, [default])
        order = [legit_key, eve_key or "sigma2_e", "rho_ab", "rho_e", "alpha"]
        points = []
        for values in itertools.product(*(axes[key] for key in order)):
            v = dict(zip(order, values))
            try:
                sigma2 = 10.0 ** (v["snr_db"] / 10.0) if "snr_db" in v else v["sigma2"]
                if "snr_eve_db" in v:
                    if v["alpha"] == 0:
                        raise ValueError("snr_eve_db needs alpha != 0")
                    sigma2_e = 10.0 ** (v["snr_eve_db"] / 10.0) / (v["alpha"] ** 2 * sigma2)
                else:
                    sigma2_e = v["sigma2_e"]
                params = ModelParams(sigma2, sigma2_e, v["rho_ab"], v["rho_e"], v["alpha"])
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"grid: invalid point {v}: {exc}") from None
            points.append(params)
        if not points:
            raise ConfigError("grid: expands to no points")
        return points


def _exactly_one(grid: dict, keys: tuple[str, str], required: bool) -> str | None:
    present = [k for k in keys if k in grid]
    if len(present) > 1:
        raise ConfigError(f"grid: give only one of {keys}")
    if not present:
        if required:
            raise ConfigError(f"grid: one of {keys} is required")
        return None
    return present[0]


def _axis(grid: dict, key: str) -> list[float]:
    spec = grid[key]
    where = f"grid.{key}"
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "step", "num"}
        if unknown or not {"start", "stop"} <= set(spec) or ("step" in spec) == ("num" in spec):
            raise ConfigError(f"{where}: range needs start, stop and exactly one of step/num")
        start, stop = _number(spec["start"], where), _number(spec["stop"], where)
        if "num" in spec:
            num = spec["num"]
            if isinstance(num, bool) or not isinstance(num, int) or num < 1:
                raise ConfigError(f"{where}.num: must be a positive integer")
            values = np.linspace(start, stop, num)
        else:
            step = _number(spec["step"], where)
            if step <= 0 or stop < start:
                raise ConfigError(f"{where}: need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = start + step * np.arange(count)
        return [float(v) for v in values]
    if isinstance(spec, list):
        if not spec:
            raise ConfigError(f"{where}: empty list")
        return [_number(v, where) for v in spec]
    return [_number(spec, where)]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    return value


def from_mapping(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    if "grid" not in raw or not isinstance(raw["grid"], dict):
        raise ConfigError("grid: required mapping is missing")
    output = raw.get("output") or {}
    if not isinstance(output, dict) or set(output) - {"path", "format"}:
        raise ConfigError("output: expected a mapping with path and format")
    estimator = raw.get("estimator") or {}
    if not isinstance(estimator, dict):
        raise ConfigError("estimator: expected a mapping")
    return RunConfig(
        grid=dict(raw["grid"]),
        regime=raw.get("regime", "no_csie"),
        seed=raw.get("seed", 0),
        n_samples=raw.get("n_samples", DEFAULT_N_SAMPLES),
        n_channel_draws=raw.get("n_channel_draws", DEFAULT_N_DRAWS),
        common_random_numbers=bool(raw.get("common_random_numbers", True)),
        estimator={"method": "knn", "k": 4, "bandwidth": "silverman", **estimator},
        output_path=output.get("path"),
        output_format=output.get("format", "csv"),
    )


def load(path: str | Path) -> RunConfig:
    """Parse a YAML config file. Relative output paths are kept as written."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else "unknown line"
        raise ConfigError(f"{path}: YAML syntax error at {where}: {exc}") from None
    return from_mapping(raw)
