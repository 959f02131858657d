"""Experiment configuration: schema, defaults, validation, JSON round trip.

The config file is plain JSON with one object per subsystem.  Every run
directory embeds the resolved config and its SHA-256 fingerprint so any
output can be traced back to exact settings.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .comb import CombMode, build_comb
from .fock import InterferometerParams


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class CombSettings:
    # delta defaults to a generic nonzero slip: with delta = 0 and a constant
    # arm phase the two CEP branches are mirror images of the detection phase
    # and no measurement can ever tell them apart
    center_index: int = 40
    width: float = 6.0
    n_lines: int = 49
    delta: float = 0.13
    field_scale: float = 1.0


@dataclass
class InterferometerSettings:
    xi2: float = 1.0
    balance: str = "mean-n"  # "mean-n" | "exact-n"
    detune: float = 1.0  # multiplies the balanced xi1 (oracle experiments)
    phi: float | str = 0.0  # radians, or "random" for a fresh draw per trajectory
    phi_ramp: float = 0.0  # radians added per pulse
    n_min: int = 0


@dataclass
class LaserSettings:
    kind: str = "poissonian"  # "poissonian" | "fixed-m"
    mean_n: float = 10000.0
    fixed_m: int | None = None


@dataclass
class CountSettings:
    kind: str = "poisson"  # "poisson" | "fixed"
    value: float = 100.0


@dataclass
class TraceSettings:
    pulses: list[int] = field(default_factory=lambda: [0, 20])
    points: int = 128


@dataclass
class CalibrationSettings:
    transient_pulses: int = 10
    pulse_modulo: int = 1
    grid_points: int = 1024
    visibility_threshold: float = 0.05
    quadrature_ramp: float = math.pi / 2  # auxiliary scan ramp, rad per pulse


@dataclass
class OutputSettings:
    root: str | None = None  # default: $F2FSIM_OUTPUT_ROOT or cwd
    format: str = "csv"  # "csv" | "json"


@dataclass
class ExperimentConfig:
    comb: CombSettings = field(default_factory=CombSettings)
    interferometer: InterferometerSettings = field(default_factory=InterferometerSettings)
    laser: LaserSettings = field(default_factory=LaserSettings)
    counts: CountSettings = field(default_factory=CountSettings)
    n_pulses: int = 20
    n_trajectories: int = 1
    seed: int = 20260810
    workers: int = 1
    force_first_pulse: list[int] | None = None  # [n1, n2] conditioning of pulse 1
    track_cep_fidelity: bool = False
    trace: TraceSettings = field(default_factory=TraceSettings)
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def reference_n(self) -> float:
        """Photon-number scale used to balance the interferometer."""
        if self.laser.kind == "poissonian":
            return self.laser.mean_n
        if self.laser.fixed_m is not None:
            return float(self.laser.fixed_m)
        return self.laser.mean_n


_SECTIONS = {
    "comb": CombSettings,
    "interferometer": InterferometerSettings,
    "laser": LaserSettings,
    "counts": CountSettings,
    "trace": TraceSettings,
    "calibration": CalibrationSettings,
    "output": OutputSettings,
}


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def config_to_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    return dataclasses.asdict(cfg)


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be an object")
            known = {f.name for f in dataclasses.fields(cls)}
            unknown = set(value) - known
            if unknown:
                raise ConfigError(f"unknown keys in section {key!r}: {sorted(unknown)}")
            kwargs[key] = cls(**value)
        else:
            known = {f.name for f in dataclasses.fields(ExperimentConfig)}
            if key not in known:
                raise ConfigError(f"unknown top-level key {key!r}")
            kwargs[key] = value
    try:
        cfg = ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = config_from_dict(data)
    validate_config(cfg)
    return cfg


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")


def config_fingerprint(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def validate_config(cfg: ExperimentConfig) -> None:
    """Raise ConfigError if any setting falls outside the module preconditions."""
    errors: list[str] = []
    try:
        make_comb(cfg)
    except (ValueError, TypeError) as exc:
        errors.append(f"comb: {exc}")

    i = cfg.interferometer
    if i.xi2 <= 0:
        errors.append("interferometer: xi2 must be positive (xi1 is balanced against it)")
    if i.balance not in ("mean-n", "exact-n"):
        errors.append(f"interferometer: unknown balance mode {i.balance!r}")
    if i.detune <= 0:
        errors.append("interferometer: detune must be positive")
    if not (i.phi == "random" or isinstance(i.phi, (int, float))):
        errors.append("interferometer: phi must be a number or 'random'")
    if i.n_min < 0:
        errors.append("interferometer: n_min must be nonnegative")

    las = cfg.laser
    if las.kind not in ("poissonian", "fixed-m"):
        errors.append(f"laser: unknown kind {las.kind!r}")
    if las.kind == "poissonian" and las.mean_n <= 0:
        errors.append("laser: poissonian input needs mean_n > 0")
    if las.kind == "fixed-m" and (las.fixed_m is None or las.fixed_m < 0):
        errors.append("laser: fixed-m input needs fixed_m >= 0")

    c = cfg.counts
    if c.kind not in ("poisson", "fixed"):
        errors.append(f"counts: unknown kind {c.kind!r}")
    if c.value < 0:
        errors.append("counts: value must be nonnegative")
    if c.kind == "fixed" and c.value != int(c.value):
        errors.append("counts: fixed count must be an integer")

    if cfg.n_pulses < 0:
        errors.append("n_pulses must be nonnegative")
    if cfg.n_trajectories < 1:
        errors.append("n_trajectories must be at least 1")
    if cfg.workers < 1:
        errors.append("workers must be at least 1")
    if cfg.force_first_pulse is not None:
        f = cfg.force_first_pulse
        if len(f) != 2 or any((not isinstance(x, int)) or x < 0 for x in f):
            errors.append("force_first_pulse must be [n1, n2] with nonnegative integers")

    tr = cfg.trace
    if tr.points < 2:
        errors.append("trace: need at least 2 points per pulse")
    if any(p < 0 or p > cfg.n_pulses for p in tr.pulses):
        errors.append("trace: pulse indices must lie in [0, n_pulses]")

    cal = cfg.calibration
    if cal.transient_pulses < 0:
        errors.append("calibration: transient_pulses must be nonnegative")
    if cal.pulse_modulo < 1:
        errors.append("calibration: pulse_modulo must be >= 1")
    if cal.grid_points < 8:
        errors.append("calibration: grid_points must be >= 8")
    if not 0 <= cal.visibility_threshold < 1:
        errors.append("calibration: visibility_threshold must be in [0, 1)")

    if cfg.output.format not in ("csv", "json"):
        errors.append(f"output: unknown format {cfg.output.format!r}")

    if errors:
        raise ConfigError("; ".join(errors))


def make_comb(cfg: ExperimentConfig) -> CombMode:
    s = cfg.comb
    return build_comb(
        center_index=s.center_index,
        width=s.width,
        n_lines=s.n_lines,
        delta=s.delta,
        field_scale=s.field_scale,
    )


def make_interferometer(cfg: ExperimentConfig, phi: float, realized_m: int | None = None) -> InterferometerParams:
    """Interferometer parameters with the balance rule resolved.

    "mean-n" balances against the configured mean photon number; "exact-n"
    against the realized initial photon number of the trajectory at hand.
    """
    i = cfg.interferometer
    if i.balance == "exact-n":
        if realized_m is None:
            raise ConfigError("exact-n balance needs the realized photon number")
        reference = float(realized_m)
    else:
        reference = cfg.reference_n()
    return InterferometerParams.balanced(
        reference_n=reference,
        xi2=i.xi2,
        phi=phi,
        n_min=i.n_min,
        balance_ref=i.balance,
        detune=i.detune,
    )
