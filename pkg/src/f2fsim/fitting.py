"""Offset-frequency fitting of per-pulse detection rates.

The D1 rate at pulse N follows A + B*cos(theta0 + 2*pi*(delta - ramp/2pi)*(N-1)),
where ramp is the per-pulse arm-phase increment.  Sampled at integer pulse
indices, a single series determines delta only up to the alias delta <->
1-delta (the two produce identical samples for a suitable theta0), so the
calibration runs a quadrature pair of scans with different ramps and fits
them jointly: the true delta is the only frequency that minimizes both
residuals at once.

The residual as a function of the trial delta is periodic and multimodal,
hence grid search over [0, 1) followed by golden-section refinement rather
than a gradient method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class FitRejectedError(RuntimeError):
    """The fitted fringe is too weak to trust (visibility below threshold)."""


@dataclass(frozen=True)
class RateSeries:
    """One scan: D1 rates at integer pulse offsets with a known phase ramp."""

    pulse_offsets: np.ndarray  # (N-1) values, integers
    rates: np.ndarray
    ramp: float = 0.0  # arm-phase increment per pulse, radians

    def __post_init__(self) -> None:
        j = np.asarray(self.pulse_offsets, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if j.ndim != 1 or j.shape != r.shape or j.size < 4:
            raise ValueError("need matching 1-d series with at least 4 points")
        object.__setattr__(self, "pulse_offsets", j)
        object.__setattr__(self, "rates", r)


@dataclass(frozen=True)
class ScanFit:
    mean: float  # A
    amplitude: float  # B
    phase: float  # theta0
    rss: float
    fringe_cycles: float  # full fringe periods covered by the scan window

    @property
    def visibility(self) -> float:
        return self.amplitude / self.mean if self.mean != 0.0 else math.inf


@dataclass(frozen=True)
class OffsetFrequencyFit:
    delta_hat: float
    scans: tuple[ScanFit, ...]
    residual_rms: float

    @property
    def visibility(self) -> float:
        """B/A of the strongest fringe, preferring scans with >= 2 full cycles.

        Amplitude and mean estimates from sub-cycle fringes are strongly
        correlated and can be biased, so such scans are only used when no
        scan covers two cycles.
        """
        eligible = [s for s in self.scans if s.fringe_cycles >= 2.0]
        pool = eligible if eligible else list(self.scans)
        best = max(pool, key=lambda s: s.amplitude)
        return best.visibility


def _series_fit(series: RateSeries, delta: float) -> ScanFit:
    """Least-squares A, B, theta0 at a fixed trial delta."""
    freq = delta - series.ramp / TWO_PI
    arg = TWO_PI * freq * series.pulse_offsets
    design = np.column_stack([np.ones_like(arg), np.cos(arg), np.sin(arg)])
    coef, _, _, _ = np.linalg.lstsq(design, series.rates, rcond=None)
    resid = series.rates - design @ coef
    a, c, s = coef
    g = freq % 1.0
    span = float(series.pulse_offsets.max() - series.pulse_offsets.min())
    return ScanFit(
        mean=float(a),
        amplitude=float(math.hypot(c, s)),
        phase=float(math.atan2(-s, c)),
        rss=float(resid @ resid),
        fringe_cycles=min(g, 1.0 - g) * span,
    )


def _joint_rss(series_list: list[RateSeries], delta: float) -> float:
    return sum(_series_fit(s, delta).rss for s in series_list)


def fit_offset_frequency(
    series_list: list[RateSeries],
    grid_points: int = 1024,
    refine_iters: int = 60,
) -> OffsetFrequencyFit:
    """Grid search for delta in [0, 1) plus golden-section refinement."""
    if not series_list:
        raise ValueError("need at least one rate series")
    grid = np.arange(grid_points) / grid_points
    rss = np.array([_joint_rss(series_list, d) for d in grid])
    i = int(np.argmin(rss))
    h = 1.0 / grid_points
    a, b = grid[i] - h, grid[i] + h

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = _joint_rss(series_list, c % 1.0)
    fd = _joint_rss(series_list, d % 1.0)
    for _ in range(refine_iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = _joint_rss(series_list, c % 1.0)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = _joint_rss(series_list, d % 1.0)
    delta_hat = (0.5 * (a + b)) % 1.0

    scans = tuple(_series_fit(s, delta_hat) for s in series_list)
    n_points = sum(s.rates.size for s in series_list)
    rms = math.sqrt(sum(f.rss for f in scans) / n_points)
    return OffsetFrequencyFit(delta_hat=delta_hat, scans=scans, residual_rms=rms)


def synthetic_rates(
    pulse_offsets: np.ndarray,
    delta: float,
    ramp: float = 0.0,
    mean: float = 0.5,
    amplitude: float = 0.45,
    phase: float = 0.0,
) -> np.ndarray:
    """Noiseless rate model, for closed-loop fitter checks."""
    freq = delta - ramp / TWO_PI
    return mean + amplitude * np.cos(phase + TWO_PI * freq * np.asarray(pulse_offsets))
