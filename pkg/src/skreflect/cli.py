"""Command-line front end.

Subcommands:

``sweep CONFIG``
    Evaluate a YAML run config (see :mod:`skreflect.config`) and write one
    record per grid point (and estimator) to CSV or JSON.
``antenna``
    Print the power breakdown of a conjugate-matched antenna.
``validate-estimators``
    Check the entropy estimators against closed-form Gaussian entropies.

Progress goes to stderr; data goes only to the output file (or stdout when
no output path is configured).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import antenna, bounds
from .config import ConfigError, RunConfig, load

log = logging.getLogger("skreflect")

COLUMNS = ("snr_db", "snr_eve_db", "sigma2", "sigma2_e", "rho_ab", "rho_e", "alpha", "regime",
           "lower_bits", "lower_stderr", "upper_bits", "upper_stderr", "method", "n", "seed",
           "clamp_count", "error")
_FLOAT_COLUMNS = {"snr_db", "snr_eve_db", "sigma2", "sigma2_e", "rho_ab", "rho_e", "alpha",
                  "lower_bits", "lower_stderr", "upper_bits", "upper_stderr"}
_INT_COLUMNS = {"n", "seed", "clamp_count"}


def run(config: RunConfig) -> list[dict]:
    """Evaluate every grid point of ``config`` and write the result file.

    Returns the records in output order: grid order, and for
    ``estimator.method = both`` the kNN row of a point precedes its KDE row.
    """
    config.validate()
    grid = config.points()
    per_method = []
    for method in config.methods:
        log.info("sweeping %d points, regime=%s, method=%s", len(grid), config.regime, method)
        per_method.append(bounds.sweep(
            grid, config.regime, seed=config.seed, n_samples=config.n_samples,
            n_channel_draws=config.n_channel_draws,
            method=method if method != "exact" else "knn",
            hyper=config.hyper(method) if method != "exact" else None,
            common_random_numbers=config.common_random_numbers))
    records = [est.to_record() for point in zip(*per_method) for est in point]
    text = dumps(records, config.output_format)
    if config.output_path:
        path = Path(config.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        log.info("wrote %d records to %s", len(records), path)
    else:
        sys.stdout.write(text)
    return records


def dumps(records: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: r[c] for c in COLUMNS} for r in records], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        writer.writerow([repr(r[c]) if c in _FLOAT_COLUMNS else r[c] for c in COLUMNS])
    return buf.getvalue()


def read_results(path: str | Path) -> list[dict]:
    """Parse a result file written by :func:`run` back into records."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("["):
        return json.loads(text)
    rows = list(csv.DictReader(io.StringIO(text)))
    records = []
    for row in rows:
        rec = {}
        for c in COLUMNS:
            v = row[c]
            if c in _FLOAT_COLUMNS:
                rec[c] = float(v)
            elif c in _INT_COLUMNS and v != "":
                rec[c] = int(v)
            else:
                rec[c] = v
        records.append(rec)
    return records


def antenna_report(r_loss: float, r_rad: float, x_a: float = 0.0, v_oc: float = 1.0,
                   coupling: float = 1.0) -> dict:
    circuit = antenna.matched_load(antenna.AntennaCircuit(r_loss, r_rad, x_a, v_oc=v_oc))
    pb = antenna.power_breakdown(circuit)
    return {
        "z_antenna": [circuit.z_antenna.real, circuit.z_antenna.imag],
        "z_load": [circuit.z_load.real, circuit.z_load.imag],
        "p_load": pb.p_load,
        "p_diss": pb.p_diss,
        "p_rerad": pb.p_rerad,
        "p_total": pb.p_total,
        "ratio": pb.ratio,
        "coupling": coupling,
        "alpha_suggested": antenna.suggest_alpha(pb.ratio, coupling),
    }


def _format_table(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, list):
            value = complex(*value)
            text = f"{value.real:.6g} {'+' if value.imag >= 0 else '-'} {abs(value.imag):.6g}j ohm"
        else:
            text = f"{value:.6g}"
        lines.append(f"{key:<16}{text}")
    return "\n".join(lines) + "\n"


def _cmd_sweep(args) -> int:
    try:
        config = load(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.n_samples is not None:
            config.n_samples = args.n_samples
        if args.n_channel_draws is not None:
            config.n_channel_draws = args.n_channel_draws
        if args.regime is not None:
            config.regime = args.regime
        if args.estimator is not None:
            config.estimator["method"] = args.estimator
        if args.output is not None:
            config.output_path = args.output
        if args.format is not None:
            config.output_format = args.format
        config.validate()
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = run(config)
    failed = sum(1 for r in records if r["error"])
    if failed:
        log.warning("%d of %d points failed; see the error column", failed, len(records))
    return 0


def _cmd_antenna(args) -> int:
    try:
        report = antenna_report(args.r_loss, args.r_rad, args.x_a, args.v_oc, args.coupling)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(json.dumps(report, indent=1) + "\n" if args.json else _format_table(report))
    return 0


def _cmd_validate(args) -> int:
    from .validation import gaussian_oracle_suite

    results = gaussian_oracle_suite(dims=args.dims, n_cases=args.cases, n=args.n, k=args.k,
                                    methods=args.methods, seed=args.seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.method} d={r.dim} case={r.case} estimate={r.estimate:.4f} "
              f"exact={r.exact:.4f} stderr={r.stderr:.4f} z={r.z:+.2f}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} cases within {args.tolerance} stderr")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skreflect",
                                description="Secret-key rate bounds under antenna reflections.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("sweep", help="evaluate a run config over its parameter grid")
    s.add_argument("config", help="YAML run config")
    s.add_argument("--seed", type=int)
    s.add_argument("--n-samples", type=int)
    s.add_argument("--n-channel-draws", type=int)
    s.add_argument("--regime", choices=bounds.REGIMES)
    s.add_argument("--estimator", choices=("knn", "kde", "both"))
    s.add_argument("--output", help="output path (overrides the config)")
    s.add_argument("--format", choices=("csv", "json"))
    s.set_defaults(func=_cmd_sweep)

    a = sub.add_parser("antenna", help="power budget of a conjugate-matched antenna")
    a.add_argument("--r-loss", type=float, default=0.0, help="loss resistance (ohm)")
    a.add_argument("--r-rad", type=float, default=73.0, help="radiation resistance (ohm)")
    a.add_argument("--x-a", type=float, default=0.0, help="antenna reactance (ohm)")
    a.add_argument("--v-oc", type=float, default=1.0, help="open-circuit voltage (V)")
    a.add_argument("--coupling", type=float, default=1.0,
                   help="factor mapping sqrt(ratio) to alpha, in [0, 1]")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=_cmd_antenna)

    v = sub.add_parser("validate-estimators", help="Gaussian oracle checks of the estimators")
    v.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3, 4])
    v.add_argument("--cases", type=int, default=5)
    v.add_argument("--n", type=int, default=20_000)
    v.add_argument("--k", type=int, default=4)
    v.add_argument("--methods", nargs="+", choices=("knn", "kde"), default=["knn", "kde"])
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_validate, tolerance=3)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
