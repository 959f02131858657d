"""Closed-form post-detection states and the brute-force expansion oracle.

After a pulse in which n1 photons fired D1 and n2 fired D2, the cavity
state is the jump-operator product applied to the initial number state.
This module provides three independent routes to that state:

* ``exact_post_state`` applies the operators one detection at a time
  (ground truth for everything else);
* ``binomial_post_state`` builds the same state from the polynomial
  expansion of the operator product, with exact integer binomial algebra
  and log-domain magnitude accumulation so nothing overflows;
* ``two_branch_post_state`` is the large-n closed form: an equal
  superposition of two Gaussian-weighted number-state combs whose
  carrier-envelope phases sit at phi +- pi*n2/n.

``cep_state`` is the single-branch building block: a Gaussian-weighted
superposition sum_k w(n,k) e^{i k cep} |m-n-k> with a definite
carrier-envelope phase.  Phase convention: amplitudes carry e^{+i k cep},
which makes arg<b> = -cep (see tests and README).
"""

from __future__ import annotations

import math
from math import comb as int_comb

import numpy as np
from scipy.special import gammaln

from .fock import (
    FockVector,
    InterferometerParams,
    apply_jump,
    jump_phase,
    normalize,
    number_state,
)

# Gaussian weights below WEIGHT_CUTOFF * peak are dropped from the k window.
WEIGHT_CUTOFF = 1e-8

TWO_PI = 2.0 * math.pi


class PhotonExhaustionError(ValueError):
    """Not enough photons in the window for the requested detections."""


def binomial_gaussian_weights(n: int, cutoff: float = WEIGHT_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian stand-in for binomial coefficients: w(n,k) ~ exp[-2(k-n/2)^2/n].

    Returns the retained integer k values and the weights normalized to
    sum(w^2) = 1.  The window keeps every k with w >= cutoff * max(w);
    its half-width grows like sqrt(n * ln(1/cutoff) / 2).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.array([0]), np.array([1.0])
    half = math.sqrt(-0.5 * n * math.log(cutoff))
    k_lo = math.ceil(n / 2 - half)
    k_hi = math.floor(n / 2 + half)
    ks = np.arange(k_lo, k_hi + 1)
    w = np.exp(-2.0 * (ks - n / 2.0) ** 2 / n)
    w /= math.sqrt(float(np.sum(w**2)))
    return ks, w


def cep_state(m: int, n: int, cep: float, cutoff: float = WEIGHT_CUTOFF) -> FockVector:
    """Normalized Gaussian-weighted number-state superposition with a definite CEP.

    Amplitude w(n,k) e^{i k cep} sits at photon number m - n - k.  Raises
    if the retained k window would reach below zero photons.
    """
    ks, w = binomial_gaussian_weights(n, cutoff)
    k_max = int(ks[-1])
    if m - n - k_max < 0:
        raise PhotonExhaustionError(
            f"window needs photon numbers down to {m - n - k_max} (m={m}, n={n})"
        )
    offset = m - n - k_max
    amps = np.zeros(ks.size, dtype=complex)
    # photon number m-n-k lands at index k_max - k
    amps[k_max - ks] = w * np.exp(1j * ks * cep)
    return FockVector(offset, amps)


def exact_post_state(
    m: int,
    n1: int,
    n2: int,
    params: InterferometerParams,
    t: float = 0.0,
    delta: float = 0.0,
) -> FockVector:
    """Post-detection state from n1 D1 jumps and n2 D2 jumps applied to |m>.

    Sequential operator application with renormalization at each step
    (the operators are linear, so intermediate rescaling is harmless).
    This is the ground truth used to judge every approximation.
    """
    n = n1 + n2
    if m <= 2 * n:
        raise PhotonExhaustionError(f"need m > 2(n1+n2), got m={m}, n1+n2={n}")
    state = number_state(m)
    # The jump operators commute, so the port order is free.  Interleave the
    # ports: applying one port n times in a row drives the state toward that
    # port's preferred phase, which turns every later opposite-port
    # application into a near-annihilation whose residue is float noise.
    paired = min(n1, n2)
    signs = [1, -1] * paired + [1 if n1 > n2 else -1] * abs(n1 - n2)
    for sign in signs:
        state = apply_jump(state, params, t, sign, delta)
        if state.is_zero:
            raise PhotonExhaustionError("state exhausted during operator product")
        state, _ = normalize(state)
    return state


def _expansion_coefficients(n1: int, n2: int) -> list[int]:
    """Exact integer coefficients T_k = sum_{p+q=k} C(n1,p) C(n2,q) (-1)^q.

    Computed in arbitrary-precision integer arithmetic, so the large signed
    cancellations (T_k can be ~1e-19 of the largest product term) are exact.
    """
    coeffs = [0] * (n1 + n2 + 1)
    for p in range(n1 + 1):
        cp = int_comb(n1, p)
        for q in range(n2 + 1):
            term = cp * int_comb(n2, q)
            coeffs[p + q] += -term if q % 2 else term
    return coeffs


def binomial_post_state(
    m: int,
    n1: int,
    n2: int,
    params: InterferometerParams,
    t: float = 0.0,
    delta: float = 0.0,
    approximate: bool = False,
) -> FockVector:
    """Post-detection state from the explicit polynomial expansion.

    The amplitude of |m-n-k> is
        T_k * sqrt(m (m-1) ... (m-n-k+1)) * xi1^(n-k) * xi2^k * e^{i k theta}
    with T_k the signed binomial double sum and theta the jump phase.
    Magnitudes are accumulated in the log domain relative to their maximum,
    so the result is finite for any m, n reachable in double precision.

    With ``approximate=True`` the falling factorial is replaced by m^{k/2}
    and the balance ratio xi2*sqrt(m)/xi1 by 1, which drops both factors
    and leaves the pure coefficient state T_k e^{i k theta} |m-n-k>.
    """
    n = n1 + n2
    if m <= 2 * n:
        raise PhotonExhaustionError(f"need m > 2(n1+n2), got m={m}, n1+n2={n}")
    theta = jump_phase(params, t, delta)
    coeffs = _expansion_coefficients(n1, n2)

    ks = np.arange(n + 1)
    signs = np.array([0 if c == 0 else math.copysign(1.0, c) for c in coeffs])
    log_t = np.array([math.log(abs(c)) if c != 0 else -np.inf for c in coeffs])
    if not approximate:
        # log sqrt(m!/(m-n-k)!) and the route weights
        log_fall = 0.5 * (gammaln(m + 1) - gammaln(m - n - ks + 1))
        with np.errstate(divide="ignore"):
            log_xi = (n - ks) * np.log(params.xi1) + ks * np.log(params.xi2)
        log_t = log_t + log_fall + log_xi
    finite = log_t > -np.inf
    if not np.any(finite):
        raise PhotonExhaustionError("all expansion terms vanish")
    log_t = log_t - log_t[finite].max()
    mags = np.where(finite, np.exp(log_t), 0.0)
    amps_by_k = signs * mags * np.exp(1j * ks * theta)

    offset = m - n - n  # photon number at k = n
    amps = amps_by_k[::-1]  # ascending photon number means descending k
    state, _ = normalize(FockVector(offset, amps))
    return state


def two_branch_post_state(m: int, n1: int, n2: int, phi: float) -> FockVector:
    """Large-n closed form: equal superposition of CEP branches phi +- pi*n2/n."""
    n = n1 + n2
    if n < 2:
        raise ValueError("need at least two detections (n1+n2 >= 2)")
    shift = math.pi * n2 / n
    plus = cep_state(m, n, phi + shift)
    minus = cep_state(m, n, phi - shift)
    amps = plus.amps + minus.amps  # identical windows by construction
    state, _ = normalize(FockVector(plus.offset, amps))
    return state


def gaussian_cosine_series(
    sigma: float, mu: float, q_max: int, nodes: int = 2048
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fourier coefficients of exp(-sigma^2 x^2 / 2) cos(mu x) on [-pi, pi].

    Returns (q, c_exact, c_gauss): the exact coefficients from
    Gauss-Legendre quadrature and the closed-form approximation
    [exp(-(q-mu)^2/(2 sigma^2)) + exp(-(q+mu)^2/(2 sigma^2))] / (2 sqrt(2pi) sigma),
    valid when the Gaussian is narrow enough to ignore the tails beyond pi.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    qs = np.arange(-q_max, q_max + 1)
    x, wts = np.polynomial.legendre.leggauss(nodes)
    x = x * math.pi
    wts = wts * math.pi
    f = np.exp(-0.5 * sigma**2 * x**2) * np.cos(mu * x)
    # f is even, so only the cosine part of e^{-iqx} survives
    c_exact = (f * wts) @ np.cos(np.outer(x, qs)) / (2.0 * math.pi)
    c_gauss = (
        np.exp(-((qs - mu) ** 2) / (2.0 * sigma**2))
        + np.exp(-((qs + mu) ** 2) / (2.0 * sigma**2))
    ) / (2.0 * math.sqrt(2.0 * math.pi) * sigma)
    return qs, c_exact, c_gauss


def best_cep_fidelity(
    state: FockVector,
    m: int,
    n: int,
    grid: int = 128,
    refine_iters: int = 40,
) -> tuple[float, float]:
    """Maximal fidelity of ``state`` with the CEP-state family at fixed (m, n).

    Scans the carrier-envelope phase on a coarse grid and refines the best
    point by golden-section search.  Returns (fidelity, cep).
    """
    ks, w = binomial_gaussian_weights(n)
    if m - n - int(ks[-1]) < 0:
        raise PhotonExhaustionError("CEP-state window would cross below vacuum")
    photon = m - n - ks
    amp = np.array([state.amplitude_at(int(j)) for j in photon])
    coeff = w * amp  # overlap(cep) = sum_k coeff_k e^{-i k cep}

    def overlap_sq(cep: float) -> float:
        return abs(np.sum(coeff * np.exp(-1j * ks * cep))) ** 2

    phases = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    values = np.abs(np.exp(-1j * np.outer(phases, ks)) @ coeff) ** 2
    i = int(np.argmax(values))
    lo = phases[i] - TWO_PI / grid
    hi = phases[i] + TWO_PI / grid
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = overlap_sq(c), overlap_sq(d)
    for _ in range(refine_iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = overlap_sq(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = overlap_sq(d)
    best = 0.5 * (a + b)
    return overlap_sq(best), best % TWO_PI
