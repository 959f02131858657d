"""Photon-number-basis state vectors and the single-mode bosonic operators.

A pure state of the cavity mode is stored as a contiguous window of complex
amplitudes over photon numbers: ``amps[i]`` is the amplitude of the number
state ``|offset + i>``.  All operations are pure functions returning new
vectors, so states are safe to share read-only and to send between worker
processes.

Unnormalized vectors are meaningful here: the squared norm of a
jump-operator output is proportional to the corresponding detection
probability, so the caller decides when to renormalize.  The zero vector
(single zero amplitude at offset 0) represents an impossible detection
branch and is ordinary data, not an error, until someone tries to
normalize it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# Edge amplitudes below TRIM_RATIO * max|amp| are dropped after every
# operation.  Each trimmed amplitude carries < 1e-28 of the squared norm,
# so cumulative norm loss stays far below the 1e-10 budget per operation.
TRIM_RATIO = 1e-14

TWO_PI = 2.0 * math.pi


class ZeroStateError(ValueError):
    """An operation that needs a nonzero state got the zero vector."""


@dataclass(frozen=True)
class InterferometerParams:
    """Static parameters of the f:2f detection path.

    ``xi1`` weights the one-photon conversion route and ``xi2`` the
    two-photon (second-harmonic) route; ``phi`` is the phase between the
    interferometer arms.  ``n_min`` is the per-detector, per-pulse floor of
    background counts that are reported but trigger no state collapse.
    ``balance_ref`` records how xi1 was derived from xi2 ("mean-n": from
    the configured mean photon number; "exact-n": from the realized initial
    photon number of a trajectory).
    """

    xi1: float
    xi2: float
    phi: float = 0.0
    n_min: int = 0
    balance_ref: str = "mean-n"

    def __post_init__(self) -> None:
        if self.xi1 < 0 or self.xi2 < 0:
            raise ValueError("xi1 and xi2 must be nonnegative")
        if self.xi1 == 0.0 and self.xi2 == 0.0:
            raise ValueError("xi1 and xi2 cannot both vanish")
        if self.n_min < 0:
            raise ValueError("n_min must be nonnegative")
        if self.balance_ref not in ("mean-n", "exact-n"):
            raise ValueError(f"unknown balance_ref {self.balance_ref!r}")
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    @classmethod
    def balanced(
        cls,
        reference_n: float,
        xi2: float = 1.0,
        phi: float = 0.0,
        n_min: int = 0,
        balance_ref: str = "mean-n",
        detune: float = 1.0,
    ) -> "InterferometerParams":
        """Parameters with xi1 = detune * sqrt(reference_n) * xi2.

        With ``detune=1`` the one- and two-photon amplitudes are equal for
        states with about ``reference_n`` photons, which maximizes the
        interference visibility.
        """
        if reference_n <= 0:
            raise ValueError("reference_n must be positive")
        xi1 = detune * math.sqrt(reference_n) * xi2
        return cls(xi1=xi1, xi2=xi2, phi=phi, n_min=n_min, balance_ref=balance_ref)

    def with_phi(self, phi: float) -> "InterferometerParams":
        return replace(self, phi=phi)


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over a contiguous photon-number window."""

    offset: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must form a nonempty 1-d sequence")
        if self.offset < 0:
            raise ValueError("offset (lowest photon number) must be >= 0")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def size(self) -> int:
        return self.amps.size

    @property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.amps.size)

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.amps)

    def amplitude_at(self, photon_number: int) -> complex:
        i = photon_number - self.offset
        if 0 <= i < self.amps.size:
            return complex(self.amps[i])
        return 0j


def zero_state() -> FockVector:
    return FockVector(0, np.zeros(1, dtype=complex))


def number_state(m: int) -> FockVector:
    """The pure number state |m>."""
    if m < 0:
        raise ValueError("photon number must be nonnegative")
    return FockVector(m, np.ones(1, dtype=complex))


def _trimmed(offset: int, amps: np.ndarray) -> FockVector:
    """Drop leading/trailing amplitudes below the trim cutoff."""
    mag = np.abs(amps)
    peak = mag.max()
    if peak == 0.0:
        return zero_state()
    keep = np.nonzero(mag >= TRIM_RATIO * peak)[0]
    lo, hi = int(keep[0]), int(keep[-1]) + 1
    return FockVector(offset + lo, amps[lo:hi])


def annihilate(state: FockVector) -> FockVector:
    """Apply the lowering operator b (unnormalized result).

    b|k> = sqrt(k)|k-1>, so for a normalized input the squared norm of the
    result equals the mean photon number.  Acting on a vacuum-only state
    returns the zero vector; the caller must treat that as a vanishing
    detection probability.
    """
    if state.is_zero:
        raise ZeroStateError("annihilate requires a nonzero state")
    scaled = np.sqrt(state.photon_numbers) * state.amps
    if state.offset > 0:
        return _trimmed(state.offset - 1, scaled)
    if state.size == 1:
        return zero_state()
    return _trimmed(0, scaled[1:])


def combine(a: FockVector, ca: complex, b: FockVector, cb: complex) -> FockVector:
    """ca*|a> + cb*|b| with window alignment (unnormalized)."""
    lo = min(a.offset, b.offset)
    hi = max(a.offset + a.size, b.offset + b.size)
    out = np.zeros(hi - lo, dtype=complex)
    out[a.offset - lo : a.offset - lo + a.size] = ca * a.amps
    out[b.offset - lo : b.offset - lo + b.size] += cb * b.amps
    return _trimmed(lo, out)


def jump_phase(params: InterferometerParams, t: float, delta: float = 0.0) -> float:
    """Phase of the two-photon amplitude: phi - 2*pi*delta*t."""
    return params.phi - TWO_PI * delta * t


def apply_jump(
    state: FockVector,
    params: InterferometerParams,
    t: float,
    sign: int,
    delta: float = 0.0,
) -> FockVector:
    """Apply the detection jump operator xi1*b + sign*xi2*e^{i(phi-2pi delta t)}*b^2.

    ``sign=+1`` is the D1 port, ``sign=-1`` the D2 port.  The result is not
    renormalized; its squared norm is proportional to the probability that
    this detector fires.  ``delta`` is the comb offset frequency in units
    of the repetition rate (the time ``t`` is in units of 1/f_rep).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if state.is_zero:
        return zero_state()
    b1 = annihilate(state)
    if b1.is_zero:
        return zero_state()
    b2 = annihilate(b1) if not b1.is_zero else zero_state()
    coeff2 = sign * params.xi2 * np.exp(1j * jump_phase(params, t, delta))
    return combine(b1, params.xi1, b2, coeff2)


def normalize(state: FockVector) -> tuple[FockVector, float]:
    """Return (unit-norm copy, squared norm of the input)."""
    nsq = state.norm_sq
    if nsq == 0.0:
        raise ZeroStateError("cannot normalize the zero vector (impossible branch)")
    return _trimmed(state.offset, state.amps / math.sqrt(nsq)), nsq


def inner_product(a: FockVector, b: FockVector) -> complex:
    """<a|b>, conjugating the first argument."""
    lo = max(a.offset, b.offset)
    hi = min(a.offset + a.size, b.offset + b.size)
    if hi <= lo:
        return 0j
    return complex(
        np.vdot(a.amps[lo - a.offset : hi - a.offset], b.amps[lo - b.offset : hi - b.offset])
    )


def fidelity(a: FockVector, b: FockVector) -> float:
    """|<a|b>|^2 for normalized states."""
    return abs(inner_product(a, b)) ** 2


def expect_b(state: FockVector) -> complex:
    """<b> for a normalized state, via the sqrt(k) couplings of adjacent amplitudes."""
    if state.size < 2:
        return 0j
    c = state.amps
    n = state.photon_numbers
    return complex(np.sum(np.conj(c[:-1]) * np.sqrt(n[1:]) * c[1:]))


def expect_n(state: FockVector) -> float:
    """<n> for a normalized state."""
    return float(np.sum(state.photon_numbers * np.abs(state.amps) ** 2))
