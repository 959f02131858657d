"""Frequency-comb mode definition and electric-field expectation values.

Units: the repetition rate f_rep is the unit of frequency (so time is in
pulse periods) and all physical prefactors of the field are folded into a
single dimensionless ``field_scale``.  Line j sits at f_j = j*f_rep + delta
with delta in [0, 1).  The per-line weights are real and normalized to
sum(gamma^2) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockVector, expect_b
from .poststates import binomial_gaussian_weights

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CombMode:
    """A pulsed cavity mode built from equally spaced comb lines."""

    indices: np.ndarray  # integer line indices j
    weights: np.ndarray  # real gamma_j, sum of squares 1
    delta: float = 0.0
    reference_index: int | None = None  # j0 defining the frequency scale f0
    field_scale: float = 1.0
    f_rep: float = 1.0

    def __post_init__(self) -> None:
        idx = np.array(self.indices, dtype=int)
        w = np.array(self.weights, dtype=float)
        if idx.ndim != 1 or idx.size == 0 or idx.shape != w.shape:
            raise ValueError("indices and weights must be matching nonempty 1-d arrays")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must lie in [0, 1) in units of f_rep")
        if self.f_rep <= 0:
            raise ValueError("f_rep must be positive")
        if np.any(idx * self.f_rep + self.delta <= 0):
            raise ValueError("all line frequencies must be positive")
        nrm = float(np.sum(w**2))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError("line weights must satisfy sum(gamma^2) = 1")
        ref = self.reference_index
        if ref is None:
            ref = int(idx[np.argmax(np.abs(w))])
        idx.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "reference_index", int(ref))

    @property
    def frequencies(self) -> np.ndarray:
        return self.indices * self.f_rep + self.delta

    @property
    def f0(self) -> float:
        return self.reference_index * self.f_rep


def build_comb(
    center_index: int,
    width: float,
    n_lines: int,
    delta: float,
    field_scale: float = 1.0,
) -> CombMode:
    """Gaussian-envelope comb: gamma_j ~ exp[-(j-j0)^2 / (2 width^2)].

    ``n_lines`` lines are centered on ``center_index``; the lowest index
    must stay >= 1 so every frequency is positive.
    """
    if n_lines < 1:
        raise ValueError("need at least one comb line")
    if width <= 0:
        raise ValueError("width must be positive")
    lo = center_index - (n_lines - 1) // 2
    if lo < 1:
        raise ValueError("comb would include nonpositive frequencies")
    idx = np.arange(lo, lo + n_lines)
    w = np.exp(-((idx - center_index) ** 2) / (2.0 * width**2))
    w = w / math.sqrt(float(np.sum(w**2)))
    return CombMode(
        indices=idx,
        weights=w,
        delta=delta,
        reference_index=center_index,
        field_scale=field_scale,
    )


def mode_function(comb: CombMode, t):
    """Complex mode function v_c(t) = scale * sum_j sqrt(f_j/f0) gamma_j e^{-2pi i f_j t}.

    Accepts scalar or array t.
    """
    t = np.asarray(t, dtype=float)
    f = comb.frequencies
    amp = comb.field_scale * np.sqrt(f / comb.f0) * comb.weights
    phases = np.exp(-1j * TWO_PI * np.multiply.outer(t, f))
    out = phases @ amp
    return complex(out) if out.ndim == 0 else out


def field_expectation(state: FockVector, comb: CombMode, t):
    """<E(t)> = 2 Re[v_c(t) <b>] for any normalized state (scalar or array t)."""
    beta = expect_b(state)
    v = mode_function(comb, t)
    return 2.0 * np.real(v * beta)


def cep_state_field(m: int, n: int, cep: float, comb: CombMode, t):
    """Closed-form <E(t)> for the Gaussian CEP state at (m, n, cep).

    Evaluates
        sum_k w(n,k-1) w(n,k) * 2 scale sum_j sqrt(f_j/f0) gamma_j
              sqrt(m-n-k) cos(2 pi f_j t + cep)
    in the same field-scale convention as ``mode_function``.
    """
    ks, w = binomial_gaussian_weights(n)
    if m - n - int(ks[-1]) < 0:
        raise ValueError(f"m={m} too small for the (n={n}) weight window")
    # pair w(n,k-1) w(n,k): k runs where both weights are retained
    pair = w[:-1] * w[1:]
    photon = m - n - ks[1:]
    coherence = float(np.sum(pair * np.sqrt(photon)))

    t = np.asarray(t, dtype=float)
    f = comb.frequencies
    amp = 2.0 * comb.field_scale * np.sqrt(f / comb.f0) * comb.weights
    carrier = np.cos(TWO_PI * np.multiply.outer(t, f) + cep)
    out = coherence * (carrier @ amp)
    return float(out) if out.ndim == 0 else out


def coherent_state_field(alpha: complex, comb: CombMode, t):
    """<E(t)> for a coherent state of amplitude alpha: 2 Re[v_c(t) alpha]."""
    v = mode_function(comb, t)
    return 2.0 * np.real(v * alpha)
