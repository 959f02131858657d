"""Command-line interface.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure
(rejected fit, exhausted state, failed oracle).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    config_fingerprint,
    load_config,
    validate_config,
)
from .fitting import FitRejectedError
from .fock import InterferometerParams, fidelity
from .meas import DetectionImpossibleError
from .pipelines import calibration_scan, field_emergence_report, visibility_sweep
from .poststates import (
    PhotonExhaustionError,
    binomial_post_state,
    exact_post_state,
    gaussian_cosine_series,
)
from .serialize import Table, pulses_table, run_metadata, traces_table, write_run_dir


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _add_run_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("config", help="path to the experiment config (JSON)")
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--out", default=None, help="output directory for this run")
    sub.add_argument("--format", choices=["csv", "json"], default=None)
    sub.add_argument("--trajectories", type=int, default=None)
    sub.add_argument("--quiet", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="f2fsim", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name, helptext in [
        ("calibrate", "fit the comb offset frequency from detection rates"),
        ("emerge", "record field traces showing the oscillating field build up"),
        ("visibility", "sweep the background floor n_min and fit visibilities"),
        ("validate-config", "check a config file and exit"),
    ]:
        sub = subs.add_parser(name, help=helptext)
        _add_run_options(sub)

    oracle = subs.add_parser("oracle", help="run the expansion-vs-operator equivalence suite")
    oracle.add_argument("--quiet", action="store_true")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "trajectories", None) is not None:
        cfg = replace(cfg, n_trajectories=args.trajectories)
    if getattr(args, "format", None) is not None:
        cfg = replace(cfg, output=replace(cfg.output, format=args.format))
    validate_config(cfg)
    return cfg


def _outdir(cfg: ExperimentConfig, args, kind: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    root = cfg.output.root or os.environ.get("F2FSIM_OUTPUT_ROOT") or "."
    return Path(root) / f"{kind}-{config_fingerprint(cfg)[:10]}-seed{cfg.seed}"


def _cmd_calibrate(args) -> int:
    cfg = _load(args)
    result = calibration_scan(cfg)
    outdir = _outdir(cfg, args, "calibrate")
    summary = run_metadata(cfg, "calibrate")
    summary.update(
        {
            "delta_hat": result.delta_hat,
            "visibility": result.visibility,
            "residual_rms": result.residual_rms,
            "pulses_used": result.pulses_used,
            "scan_ramps": [ramp for ramp, _ in result.scan_records],
            "per_trajectory_delta": [f.delta_hat for f in result.fits],
        }
    )
    pulses = pulses_table(
        [(i, records) for i, (_, records) in enumerate(result.scan_records)]
    )
    write_run_dir(outdir, cfg, summary, pulses=pulses)
    if not args.quiet:
        print(f"delta_hat={result.delta_hat:.6f} visibility={result.visibility:.4f} -> {outdir}")
    return 0


def _cmd_emerge(args) -> int:
    cfg = _load(args)
    result = field_emergence_report(cfg)
    outdir = _outdir(cfg, args, "emerge")
    summary = run_metadata(cfg, "emerge")
    summary.update(
        {
            "trajectories": len(result.records),
            "initial_m": [rec.initial_m for rec in result.records],
            "final_amp_abs": [rec.final_amp_abs for rec in result.records],
            "final_amp_arg": [rec.final_amp_arg for rec in result.records],
            "final_mean_photon": [rec.final_mean_photon for rec in result.records],
        }
    )
    sets = [(0, result.records)]
    write_run_dir(
        outdir, cfg, summary, pulses=pulses_table(sets), traces=traces_table(sets)
    )
    if not args.quiet:
        print(f"{len(result.records)} trajectories -> {outdir}")
    return 0


def _cmd_visibility(args) -> int:
    cfg = _load(args)
    points = visibility_sweep(cfg)
    outdir = _outdir(cfg, args, "visibility")
    table = Table(columns=["n_min", "visibility", "dilution", "delta_hat"])
    for p in points:
        table.rows.append([p.n_min, p.visibility, p.dilution, p.delta_hat])
    summary = run_metadata(cfg, "visibility")
    summary["points"] = [
        {
            "n_min": p.n_min,
            "visibility": p.visibility,
            "dilution": p.dilution,
            "delta_hat": p.delta_hat,
        }
        for p in points
    ]
    outdir.mkdir(parents=True, exist_ok=True)
    table.write(outdir / "visibility", cfg.output.format)
    write_run_dir(outdir, cfg, summary)
    if not args.quiet:
        for p in points:
            print(f"n_min={p.n_min}: visibility={p.visibility:.4f} dilution={p.dilution:.4f}")
    return 0


def _cmd_validate(args) -> int:
    cfg = _load(args)
    if not args.quiet:
        print(f"config ok (sha256 {config_fingerprint(cfg)[:12]})")
    return 0


def _cmd_oracle(args) -> int:
    worst = 0.0
    for m, n1, n2 in [(200, 4, 4), (2000, 6, 2)]:
        params = InterferometerParams.balanced(m, phi=0.7)
        exact = exact_post_state(m, n1, n2, params)
        expanded = binomial_post_state(m, n1, n2, params)
        worst = max(worst, 1.0 - fidelity(exact, expanded))
    qs, c_exact, c_gauss = gaussian_cosine_series(sigma=4.0, mu=3.0, q_max=20)
    series_err = float(np.max(np.abs(c_exact - c_gauss) / np.abs(c_gauss)))
    if not args.quiet:
        print(f"max infidelity: {worst:.3e}")
        print(f"gaussian cosine series max relative error (sigma=4): {series_err:.3e}")
    return 0 if (worst <= 1e-10 and series_err <= 1e-6) else 2


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "emerge": _cmd_emerge,
    "visibility": _cmd_visibility,
    "validate-config": _cmd_validate,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (FitRejectedError, DetectionImpossibleError, PhotonExhaustionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
