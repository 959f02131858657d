"""Stochastic measurement engine: per-pulse detection sampling and collapse.

Each detection applies one jump operator xi1*b +- xi2*e^{i(phi-2pi delta t)}*b^2
to the cavity state and renormalizes.  All detections within a pulse share
the pulse time t_N = (N-1)/f_rep.  Background counts up to ``n_min`` per
detector are added to the reported totals without touching the state: they
are losses, not measurements.

Convention note: with the e^{+ik*cep} amplitude convention of
``poststates.cep_state``, the D1 probability on a CEP state goes like
[1 + V cos(cep - phi + 2 pi delta t)] / 2, so the interference phase
advances by +2 pi delta per pulse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .comb import CombMode, field_expectation
from .config import ExperimentConfig, make_comb, make_interferometer
from .fock import (
    FockVector,
    InterferometerParams,
    annihilate,
    combine,
    expect_b,
    expect_n,
    inner_product,
    jump_phase,
    normalize,
    number_state,
    zero_state,
)
from .poststates import PhotonExhaustionError, best_cep_fidelity

TWO_PI = 2.0 * math.pi


class DetectionImpossibleError(RuntimeError):
    """The state cannot fire either detector (both jump branches vanish)."""


@dataclass(frozen=True)
class CountModel:
    """Per-pulse total detection count: fixed integer or Poisson(mean)."""

    kind: str  # "fixed" | "poisson"
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ("fixed", "poisson"):
            raise ValueError(f"unknown count model {self.kind!r}")
        if self.value < 0:
            raise ValueError("count model value must be nonnegative")

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == "fixed":
            return int(self.value)
        return int(rng.poisson(self.value))

    @property
    def mean(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PulseRecord:
    """Summary of one pulse: counts, first-detection probability, state stats."""

    pulse_index: int
    n1: int  # reported D1 counts (jumps + n_min background)
    n2: int  # reported D2 counts (jumps + n_min background)
    p1_first: float  # D1 probability for the first detection (nan if none possible)
    mean_photon: float
    amp_abs: float  # |<b>| after the pulse
    amp_arg: float  # arg <b> after the pulse
    phi: float  # arm phase during the pulse
    truncated: bool = False  # pulse cut short by photon exhaustion


@dataclass(frozen=True)
class FieldTrace:
    pulse_index: int
    times: np.ndarray
    values: np.ndarray


@dataclass
class TrajectoryRecord:
    """Everything recorded along one Monte Carlo trajectory."""

    initial_m: int
    phi0: float
    pulses: list[PulseRecord] = field(default_factory=list)
    traces: list[FieldTrace] = field(default_factory=list)
    cep_fidelities: list[float] = field(default_factory=list)  # per pulse, if tracked
    final_mean_photon: float = 0.0
    final_amp_abs: float = 0.0
    final_amp_arg: float = 0.0


def _jump_pieces(state: FockVector):
    """Shared b|psi>, b^2|psi> and their norms / overlap for both ports."""
    if state.is_zero:
        raise DetectionImpossibleError("zero state cannot fire a detector")
    b1 = annihilate(state)
    if b1.is_zero:
        b2 = zero_state()
    else:
        b2 = annihilate(b1)
    w1 = b1.norm_sq
    w2 = b2.norm_sq
    cross = inner_product(b1, b2)
    return b1, b2, w1, w2, cross


def detection_probabilities(
    state: FockVector,
    params: InterferometerParams,
    t: float,
    delta: float = 0.0,
) -> tuple[float, float]:
    """(p1, p2) with p1 + p2 = 1: relative firing probabilities of the ports."""
    _, _, w1, w2, cross = _jump_pieces(state)
    theta = jump_phase(params, t, delta)
    base = params.xi1**2 * w1 + params.xi2**2 * w2
    interference = 2.0 * params.xi1 * params.xi2 * (np.exp(1j * theta) * cross).real
    total = 2.0 * base
    if total <= 0.0:
        raise DetectionImpossibleError("both jump branches vanish")
    p1 = (base + interference) / total
    p1 = min(max(p1, 0.0), 1.0)
    return p1, 1.0 - p1


def detect_one(
    state: FockVector,
    params: InterferometerParams,
    t: float,
    rng: np.random.Generator,
    delta: float = 0.0,
) -> tuple[int, FockVector, float]:
    """Sample which detector fires, collapse the state, renormalize.

    Returns (detector, post_state, p1).  Deterministic for a given rng state.
    """
    b1, b2, w1, w2, cross = _jump_pieces(state)
    theta = jump_phase(params, t, delta)
    base = params.xi1**2 * w1 + params.xi2**2 * w2
    interference = 2.0 * params.xi1 * params.xi2 * (np.exp(1j * theta) * cross).real
    total = 2.0 * base
    if total <= 0.0:
        raise DetectionImpossibleError("both jump branches vanish")
    p1 = min(max((base + interference) / total, 0.0), 1.0)
    detector = 1 if rng.random() < p1 else 2
    sign = 1 if detector == 1 else -1
    collapsed = combine(b1, params.xi1, b2, sign * params.xi2 * np.exp(1j * theta))
    collapsed, _ = normalize(collapsed)
    return detector, collapsed, p1


def apply_detection_sequence(
    state: FockVector,
    params: InterferometerParams,
    t: float,
    detectors,
    delta: float = 0.0,
) -> FockVector:
    """Collapse through a fixed detector outcome sequence (no sampling)."""
    theta = jump_phase(params, t, delta)
    for d in detectors:
        if d not in (1, 2):
            raise ValueError("detector labels must be 1 or 2")
        b1, b2, _, _, _ = _jump_pieces(state)
        sign = 1 if d == 1 else -1
        state = combine(b1, params.xi1, b2, sign * params.xi2 * np.exp(1j * theta))
        if state.is_zero:
            raise DetectionImpossibleError("sequence exhausted the state")
        state, _ = normalize(state)
    return state


def simulate_pulse(
    state: FockVector,
    params: InterferometerParams,
    comb: CombMode,
    pulse_index: int,
    count_model: CountModel,
    rng: np.random.Generator,
    forced_counts: tuple[int, int] | None = None,
) -> tuple[PulseRecord, FockVector]:
    """One pulse: draw the detection count, collapse sequentially, report.

    ``forced_counts=(n1, n2)`` conditions the pulse on a fixed outcome split
    instead of sampling detectors (the collapse is outcome-order invariant).
    If the state runs out of photons mid-pulse the record is flagged
    ``truncated`` and carries the counts realized so far.
    """
    if pulse_index < 1:
        raise ValueError("pulse_index starts at 1")
    t = (pulse_index - 1) / comb.f_rep
    delta = comb.delta

    try:
        p1_first, _ = detection_probabilities(state, params, t, delta)
    except DetectionImpossibleError:
        p1_first = math.nan

    n1 = n2 = 0
    truncated = False
    if forced_counts is not None:
        seq = [1] * forced_counts[0] + [2] * forced_counts[1]
        try:
            state = apply_detection_sequence(state, params, t, seq, delta)
            n1, n2 = forced_counts
        except DetectionImpossibleError:
            truncated = True
    else:
        n_target = count_model.sample(rng)
        for _ in range(n_target):
            try:
                detector, state, _ = detect_one(state, params, t, rng, delta)
            except DetectionImpossibleError:
                truncated = True
                break
            if detector == 1:
                n1 += 1
            else:
                n2 += 1

    amp = expect_b(state)
    record = PulseRecord(
        pulse_index=pulse_index,
        n1=n1 + params.n_min,
        n2=n2 + params.n_min,
        p1_first=p1_first,
        mean_photon=expect_n(state),
        amp_abs=abs(amp),
        amp_arg=float(np.angle(amp)),
        phi=params.phi,
        truncated=truncated,
    )
    return record, state


def _initial_photon_number(cfg: ExperimentConfig, rng: np.random.Generator) -> int:
    if cfg.laser.kind == "poissonian":
        return int(rng.poisson(cfg.laser.mean_n))
    return int(cfg.laser.fixed_m)


def run_trajectory(cfg: ExperimentConfig, rng: np.random.Generator) -> TrajectoryRecord:
    """One full trajectory: sample the initial state, run all pulses, record.

    Draw order (for reproducibility): initial photon number first, then the
    arm phase if it is randomized, then the per-pulse counts and outcomes.
    """
    comb = make_comb(cfg)
    m0 = _initial_photon_number(cfg, rng)
    if cfg.interferometer.phi == "random":
        phi0 = float(rng.uniform(0.0, TWO_PI))
    else:
        phi0 = float(cfg.interferometer.phi)
    params0 = make_interferometer(cfg, phi=phi0, realized_m=m0)
    count_model = CountModel(cfg.counts.kind, cfg.counts.value)

    state = number_state(m0)
    record = TrajectoryRecord(initial_m=m0, phi0=phi0)
    trace_pulses = set(cfg.trace.pulses)
    if 0 in trace_pulses:
        record.traces.append(_field_trace(state, comb, 0, cfg.trace.points))

    detections = 0
    for pulse in range(1, cfg.n_pulses + 1):
        params = params0.with_phi(phi0 + cfg.interferometer.phi_ramp * (pulse - 1))
        forced = None
        if pulse == 1 and cfg.force_first_pulse is not None:
            forced = (cfg.force_first_pulse[0], cfg.force_first_pulse[1])
        pulse_record, state = simulate_pulse(
            state, params, comb, pulse, count_model, rng, forced_counts=forced
        )
        record.pulses.append(pulse_record)
        detections += (pulse_record.n1 - params.n_min) + (pulse_record.n2 - params.n_min)
        if pulse in trace_pulses:
            record.traces.append(_field_trace(state, comb, pulse, cfg.trace.points))
        if cfg.track_cep_fidelity:
            record.cep_fidelities.append(_cep_fidelity_or_nan(state, m0, detections))

    amp = expect_b(state)
    record.final_mean_photon = expect_n(state)
    record.final_amp_abs = abs(amp)
    record.final_amp_arg = float(np.angle(amp))
    return record


def _field_trace(state: FockVector, comb: CombMode, pulse_index: int, points: int) -> FieldTrace:
    center = (pulse_index - 1) / comb.f_rep if pulse_index >= 1 else 0.0
    times = center + np.linspace(-0.5, 0.5, points) / comb.f_rep
    values = field_expectation(state, comb, times)
    return FieldTrace(pulse_index=pulse_index, times=times, values=np.asarray(values))


def _cep_fidelity_or_nan(state: FockVector, m0: int, detections: int) -> float:
    try:
        fid, _ = best_cep_fidelity(state, m0, detections)
    except PhotonExhaustionError:
        return math.nan
    return fid
