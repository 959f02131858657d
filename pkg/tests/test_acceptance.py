"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Every test is deterministic (fixed seeds).  The offset frequency
delta is periodic in [0, 1), so recovery errors are measured circularly.
"""

import math
import time

import numpy as np

from f2fsim.comb import (
    build_comb,
    cep_state_field,
    coherent_state_field,
    field_expectation,
)
from f2fsim.config import (
    CombSettings,
    CountSettings,
    ExperimentConfig,
    InterferometerSettings,
    LaserSettings,
    TraceSettings,
)
from f2fsim.fock import InterferometerParams, fidelity, number_state
from f2fsim.meas import detect_one, detection_probabilities, run_trajectory
from f2fsim.pipelines import calibration_scan, run_trajectories, visibility_sweep
from f2fsim.poststates import (
    binomial_post_state,
    cep_state,
    exact_post_state,
    two_branch_post_state,
)

TWO_PI = 2.0 * math.pi


def _rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _report(num, name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _circular(a, b, period=1.0):
    d = abs(a - b) % period
    return min(d, period - d)


def test_criterion_01_expansion_equals_operator_product():
    worst_inf = 0.0
    worst_time = 0.0
    for m, n1, n2 in [(200, 4, 4), (2000, 6, 2)]:
        params = InterferometerParams.balanced(m, phi=0.7)
        start = time.perf_counter()
        exact = exact_post_state(m, n1, n2, params)
        expanded = binomial_post_state(m, n1, n2, params)
        elapsed = time.perf_counter() - start
        worst_inf = max(worst_inf, 1.0 - fidelity(exact, expanded))
        worst_time = max(worst_time, elapsed)
    ok = worst_inf <= 1e-10 and worst_time < 1.0
    _report(1, "oracle equivalence", ok,
            f"max infidelity {worst_inf:.2e} (<=1e-10), slowest point {worst_time:.3f}s (<1s)")


def test_criterion_02_two_branch_validity_trend():
    start = time.perf_counter()
    params = InterferometerParams.balanced(10_000, phi=0.4)
    fid_large = fidelity(
        exact_post_state(10_000, 50, 50, params),
        two_branch_post_state(10_000, 50, 50, 0.4),
    )
    fids = []
    for n in (8, 16, 32, 64, 128):
        m = 100 * n
        params_n = InterferometerParams.balanced(m, phi=0.4)
        fids.append(
            fidelity(
                exact_post_state(m, n // 2, n // 2, params_n),
                two_branch_post_state(m, n // 2, n // 2, 0.4),
            )
        )
    elapsed = time.perf_counter() - start
    increasing = all(b > a for a, b in zip(fids, fids[1:]))
    ok = fid_large >= 0.9 and increasing and elapsed < 30.0
    _report(2, "two-branch approximation trend", ok,
            f"fidelity(m=1e4,n=100)={fid_large:.4f} (>=0.9), "
            f"trend {['%.4f' % f for f in fids]} strictly increasing={increasing}, "
            f"{elapsed:.1f}s (<30s)")


def test_criterion_03_field_closed_form_matches():
    start = time.perf_counter()
    comb = build_comb(40, 6.0, 49, 0.0)
    t = np.linspace(-0.5, 0.5, 512)
    m, n, cep = 10_000, 100, 1.1
    closed = cep_state_field(m, n, cep, comb, t)
    # CEP states carry <b> ~ e^{-i cep}: that coherent amplitude produces the
    # cos(2 pi f t + cep) carrier the closed form is written in
    alpha = math.sqrt(m - 1.5 * n) * np.exp(-1j * cep)
    coherent = coherent_state_field(alpha, comb, t)
    err_coherent = np.linalg.norm(closed - coherent) / np.linalg.norm(coherent)
    generic = field_expectation(cep_state(m, n, cep), comb, t)
    err_generic = np.linalg.norm(closed - generic) / np.linalg.norm(closed)
    elapsed = time.perf_counter() - start
    ok = err_coherent <= 0.02 and err_generic <= 0.01 and elapsed < 5.0
    _report(3, "closed-form field", ok,
            f"vs coherent {err_coherent:.4f} (<=0.02), vs generic {err_generic:.2e} (<=0.01), "
            f"{elapsed:.1f}s (<5s)")


def test_criterion_04_detection_cosine_law():
    start = time.perf_counter()
    details = []
    ok = True
    for n in (64, 256):
        m = 100 * n
        params = InterferometerParams.balanced(m, phi=0.0)
        errs = []
        for cep in np.linspace(0.0, TWO_PI, 64, endpoint=False):
            p1, _ = detection_probabilities(cep_state(m, n, cep), params, t=1.0, delta=0.0)
            errs.append(abs(p1 - 0.5 * (1.0 + math.cos(cep))))
        bound = 4.0 / math.sqrt(n)
        details.append(f"n={n}: max err {max(errs):.4f} (<= {bound:.3f})")
        ok = ok and max(errs) <= bound
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    _report(4, "detection cosine law", ok, "; ".join(details) + f", {elapsed:.1f}s (<10s)")


def test_criterion_05_no_interference_for_number_states():
    start = time.perf_counter()
    phis = np.linspace(0.0, TWO_PI, 32, endpoint=False)
    # pure number state: p1 is phase-blind to numerical precision
    params_ref = InterferometerParams.balanced(300.0)
    pure = [
        detection_probabilities(number_state(300), params_ref.with_phi(phi), 0.0)[0]
        for phi in phis
    ]
    pure_var = max(pure) - min(pure)

    # Poissonian mixture, trajectory-averaged first detection
    rng = _rng(1234)
    samples = 10_000
    sigma = math.sqrt(0.25 / samples)
    max_dev = 0.0
    for phi in phis:
        params = InterferometerParams.balanced(200.0, phi=phi)
        hits = 0
        for _ in range(samples):
            m = int(rng.poisson(200.0))
            detector, _, _ = detect_one(number_state(m), params, 0.0, rng)
            hits += detector == 1
        max_dev = max(max_dev, abs(hits / samples - 0.5))
    elapsed = time.perf_counter() - start
    ok = pure_var <= 1e-10 and max_dev <= 3.0 * sigma and elapsed < 30.0
    _report(5, "no interference from number states", ok,
            f"pure variation {pure_var:.2e} (<=1e-10), "
            f"mixture max |rate-1/2| {max_dev:.4f} (<= {3*sigma:.4f}), {elapsed:.1f}s (<30s)")


def test_criterion_06_coherence_emergence():
    start = time.perf_counter()
    cfg = ExperimentConfig(
        comb=CombSettings(delta=0.13),
        interferometer=InterferometerSettings(phi=0.0),
        laser=LaserSettings(kind="fixed-m", fixed_m=10_000, mean_n=10_000.0),
        counts=CountSettings(kind="poisson", value=100.0),
        n_pulses=10,
        n_trajectories=1,
        seed=0,
        trace=TraceSettings(pulses=[], points=16),
        track_cep_fidelity=True,
    )
    seeds = 200
    good_fid = 0
    good_amp = 0
    for seed in range(seeds):
        rec = run_trajectory(cfg, _rng(seed))
        if rec.cep_fidelities[1] >= 0.8:
            good_fid += 1
        last = rec.pulses[-1]
        if last.amp_abs >= 0.5 * math.sqrt(last.mean_photon):
            good_amp += 1
    elapsed = time.perf_counter() - start
    frac_fid = good_fid / seeds
    frac_amp = good_amp / seeds
    ok = frac_fid >= 0.95 and frac_amp >= 0.95 and elapsed < 300.0
    _report(6, "coherence emergence", ok,
            f"fidelity>=0.8 after 2 pulses for {frac_fid:.1%} of seeds, "
            f"|<b>|>=0.5 sqrt(<n>) by pulse 10 for {frac_amp:.1%} (both >=95%), "
            f"{elapsed:.0f}s (<300s)")


def test_criterion_07_bimodal_branch_phases():
    start = time.perf_counter()
    phi = 0.3
    cfg = ExperimentConfig(
        comb=CombSettings(delta=0.13),
        interferometer=InterferometerSettings(phi=phi),
        laser=LaserSettings(kind="fixed-m", fixed_m=4000, mean_n=4000.0),
        counts=CountSettings(kind="poisson", value=40.0),
        n_pulses=12,
        n_trajectories=1,
        seed=0,
        force_first_pulse=[20, 20],
        trace=TraceSettings(pulses=[], points=16),
    )
    phases = []
    for seed in range(500):
        rec = run_trajectory(cfg, _rng(seed))
        phases.append(-rec.pulses[-1].amp_arg)  # localized CEP = -arg<b>
    phases = np.asarray(phases) % TWO_PI

    # two-component circular fit via the doubled-angle axis
    axis = np.angle(np.mean(np.exp(2j * phases))) / 2.0
    offsets = np.angle(np.exp(1j * (phases - axis)))
    cluster1 = phases[np.abs(offsets) < math.pi / 2]
    cluster2 = phases[np.abs(offsets) >= math.pi / 2]
    m1 = np.angle(np.mean(np.exp(1j * cluster1)))
    m2 = np.angle(np.mean(np.exp(1j * cluster2)))
    separation = abs(np.angle(np.exp(1j * (m1 - m2))))
    centers = sorted(((m1 - phi) % TWO_PI, (m2 - phi) % TWO_PI))
    center_dev = max(
        _circular(centers[0], math.pi / 2, period=TWO_PI),
        _circular(centers[1], 3 * math.pi / 2, period=TWO_PI),
    )
    elapsed = time.perf_counter() - start
    balanced = min(len(cluster1), len(cluster2)) >= 100
    ok = abs(separation - math.pi) <= 0.15 and center_dev <= 0.15 and balanced
    ok = ok and elapsed < 300.0
    _report(7, "bimodal branch phases", ok,
            f"separation {separation:.3f} (pi +- 0.15), centers off phi+-pi/2 by "
            f"{center_dev:.3f} (<=0.15), cluster sizes {len(cluster1)}/{len(cluster2)}, "
            f"{elapsed:.0f}s (<300s)")


def test_criterion_08_offset_frequency_recovery():
    details = []
    ok = True
    for true_delta in (0.0, 0.13, 0.5, 0.87):
        start = time.perf_counter()
        cfg = ExperimentConfig(
            comb=CombSettings(delta=true_delta),
            interferometer=InterferometerSettings(phi=0.0),
            laser=LaserSettings(kind="fixed-m", fixed_m=200_000, mean_n=200_000.0),
            counts=CountSettings(kind="poisson", value=200.0),
            n_pulses=256,
            n_trajectories=1,
            seed=12345,
            trace=TraceSettings(pulses=[], points=16),
        )
        result = calibration_scan(cfg)
        elapsed = time.perf_counter() - start
        err = _circular(result.delta_hat, true_delta)  # delta is periodic in [0,1)
        details.append(f"delta={true_delta}: err {err:.1e}, {elapsed:.0f}s")
        ok = ok and err <= 1e-3 and elapsed < 120.0
    _report(8, "offset frequency recovery", ok,
            "; ".join(details) + " (each err<=1e-3, <120s)")


def test_criterion_09_background_visibility_dilution():
    start = time.perf_counter()
    mu = 200.0
    cfg = ExperimentConfig(
        comb=CombSettings(delta=0.13),
        interferometer=InterferometerSettings(phi=0.0),
        laser=LaserSettings(kind="fixed-m", fixed_m=200_000, mean_n=200_000.0),
        counts=CountSettings(kind="poisson", value=mu),
        n_pulses=256,
        n_trajectories=1,
        seed=777,
        trace=TraceSettings(pulses=[], points=16),
    )
    points = visibility_sweep(cfg, n_min_values=[0, 50, 100])
    elapsed = time.perf_counter() - start
    details = []
    ok = elapsed < 180.0
    for p in points:
        ratio = p.visibility / p.dilution
        details.append(f"n_min={p.n_min}: vis {p.visibility:.3f} vs {p.dilution:.3f}")
        ok = ok and abs(ratio - 1.0) <= 0.10
    _report(9, "background visibility dilution", ok,
            "; ".join(details) + f" (each within 10%), {elapsed:.0f}s (<180s)")


def test_criterion_10_ensemble_symmetry_restoration():
    start = time.perf_counter()
    cfg = ExperimentConfig(
        comb=CombSettings(delta=0.13),
        interferometer=InterferometerSettings(phi="random"),
        laser=LaserSettings(kind="poissonian", mean_n=900.0),
        counts=CountSettings(kind="poisson", value=40.0),
        n_pulses=6,
        n_trajectories=1000,
        seed=424242,
        trace=TraceSettings(pulses=[6], points=64),
    )
    records = run_trajectories(cfg)
    traces = np.array([rec.traces[0].values for rec in records])
    mean = traces.mean(axis=0)
    sem = traces.std(axis=0, ddof=1) / math.sqrt(len(records))
    ratio = np.abs(mean) / np.where(sem > 0, sem, np.inf)
    elapsed = time.perf_counter() - start
    ok = bool(np.all(ratio <= 3.0)) and elapsed < 300.0
    _report(10, "ensemble symmetry restoration", ok,
            f"max |mean <E>| / sem = {float(ratio.max()):.2f} over 64 grid points "
            f"(<=3), {len(records)} trajectories, {elapsed:.0f}s (<300s)")
