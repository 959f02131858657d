"""Experiment pipelines: trajectory fan-out, calibration, emergence reports.

Trajectories are independent; with ``workers > 1`` they run in a process
pool.  Per-trajectory RNG streams are spawned from the root seed, and
results are aggregated sorted by trajectory index, so outputs do not
depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import ConfigError, ExperimentConfig, validate_config
from .fitting import (
    FitRejectedError,
    OffsetFrequencyFit,
    RateSeries,
    fit_offset_frequency,
)
from .meas import TrajectoryRecord, run_trajectory

TWO_PI = 2.0 * math.pi


def _run_indexed(job: tuple[ExperimentConfig, int, np.random.SeedSequence]):
    cfg, index, ss = job
    rng = np.random.Generator(np.random.PCG64(ss))
    return index, run_trajectory(cfg, rng)


def run_trajectories(
    cfg: ExperimentConfig,
    seed_seq: np.random.SeedSequence | None = None,
) -> list[TrajectoryRecord]:
    """Run cfg.n_trajectories independent trajectories, deterministically."""
    root = seed_seq if seed_seq is not None else np.random.SeedSequence(cfg.seed)
    children = root.spawn(cfg.n_trajectories)
    jobs = [(cfg, i, children[i]) for i in range(cfg.n_trajectories)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_indexed, jobs))
    else:
        results = [_run_indexed(job) for job in jobs]
    results.sort(key=lambda pair: pair[0])
    return [rec for _, rec in results]


def rate_series_from_record(
    record: TrajectoryRecord,
    transient: int,
    modulo: int,
    ramp: float,
) -> RateSeries:
    """Per-pulse D1 fraction after the localization transient."""
    offsets: list[float] = []
    rates: list[float] = []
    for pulse in record.pulses:
        j = pulse.pulse_index - 1
        if j < transient or (j - transient) % modulo != 0:
            continue
        total = pulse.n1 + pulse.n2
        if total == 0:
            continue
        offsets.append(float(j))
        rates.append(pulse.n1 / total)
    return RateSeries(np.array(offsets), np.array(rates), ramp=ramp)


@dataclass
class CalibrationResult:
    delta_hat: float
    visibility: float
    residual_rms: float
    fits: list[OffsetFrequencyFit]
    scan_records: list[tuple[float, list[TrajectoryRecord]]]  # (ramp, records)
    pulses_used: int

    @property
    def records(self) -> list[TrajectoryRecord]:
        return self.scan_records[0][1]


def calibration_scan(cfg: ExperimentConfig) -> CalibrationResult:
    """Fit the comb offset frequency from per-pulse detection rates.

    Sampled at integer pulse times a single rate series determines delta
    only up to an alias, and a scan whose fringe frequency lands at zero
    cannot arbitrate at all.  So the scan runs three phase schedules per
    trajectory (the configured one, plus two extra linear ramps) and fits
    them jointly: at most one schedule can be fringe-free for any delta,
    and the remaining two pin the frequency uniquely.  Raises
    FitRejectedError when the strongest fitted fringe falls below the
    visibility threshold.
    """
    validate_config(cfg)
    cal = cfg.calibration
    if cfg.n_pulses < 32:
        raise ConfigError("calibration needs n_pulses >= 32")
    if cal.quadrature_ramp % (2.0 * math.pi) == 0.0:
        raise ConfigError("calibration quadrature_ramp must not be a multiple of 2 pi")
    base_ramp = float(cfg.interferometer.phi_ramp)
    ramps = [base_ramp, base_ramp + cal.quadrature_ramp, base_ramp + cal.quadrature_ramp / 2.0]

    root = np.random.SeedSequence(cfg.seed)
    seeds = root.spawn(len(ramps))
    scan_records: list[tuple[float, list[TrajectoryRecord]]] = []
    for ramp, seed in zip(ramps, seeds):
        cfg_i = replace(cfg, interferometer=replace(cfg.interferometer, phi_ramp=ramp))
        scan_records.append((ramp, run_trajectories(cfg_i, seed_seq=seed)))

    fits: list[OffsetFrequencyFit] = []
    used = 0
    for traj in range(cfg.n_trajectories):
        series = [
            rate_series_from_record(records[traj], cal.transient_pulses, cal.pulse_modulo, ramp)
            for ramp, records in scan_records
        ]
        used += sum(s.rates.size for s in series)
        fits.append(fit_offset_frequency(series, grid_points=cal.grid_points))

    angles = np.array([TWO_PI * f.delta_hat for f in fits])
    mean_vec = np.mean(np.exp(1j * angles))
    delta_hat = float(np.angle(mean_vec) / TWO_PI) % 1.0
    visibility = float(np.mean([f.visibility for f in fits]))
    residual_rms = float(np.mean([f.residual_rms for f in fits]))

    if visibility < cal.visibility_threshold:
        raise FitRejectedError(
            f"fitted visibility {visibility:.4f} below threshold "
            f"{cal.visibility_threshold:.4f} (delta_hat={delta_hat:.6f}, "
            f"residual_rms={residual_rms:.4g}, pulses_used={used})"
        )
    return CalibrationResult(
        delta_hat=delta_hat,
        visibility=visibility,
        residual_rms=residual_rms,
        fits=fits,
        scan_records=scan_records,
        pulses_used=used,
    )


@dataclass
class EmergenceResult:
    records: list[TrajectoryRecord]


def field_emergence_report(cfg: ExperimentConfig) -> EmergenceResult:
    """Trajectories with field traces and best-matching CEP-state fidelity series."""
    validate_config(cfg)
    cfg = replace(cfg, track_cep_fidelity=True)
    return EmergenceResult(records=run_trajectories(cfg))


@dataclass
class VisibilityPoint:
    n_min: int
    visibility: float
    dilution: float  # mu / (mu + 2 n_min)
    delta_hat: float


def visibility_sweep(
    cfg: ExperimentConfig, n_min_values: list[int] | None = None
) -> list[VisibilityPoint]:
    """Calibration visibility versus the background-count floor n_min."""
    validate_config(cfg)
    mu = cfg.counts.value
    if n_min_values is None:
        n_min_values = [0, int(round(mu / 4)), int(round(mu / 2))]
    points: list[VisibilityPoint] = []
    for n_min in n_min_values:
        cfg_i = replace(
            cfg, interferometer=replace(cfg.interferometer, n_min=int(n_min))
        )
        result = calibration_scan(cfg_i)
        points.append(
            VisibilityPoint(
                n_min=int(n_min),
                visibility=result.visibility,
                dilution=mu / (mu + 2.0 * n_min),
                delta_hat=result.delta_hat,
            )
        )
    return points
