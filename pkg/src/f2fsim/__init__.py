"""Quantum-trajectory simulation of f:2f interferometer back-action.

Repeated photon detections at the output of an f:2f interferometer cannot
tell whether each click came from one cavity photon (fundamental route) or
two (second-harmonic route).  Applying the corresponding jump operators to
an initial photon-number state builds up a coherent superposition of
number states with a definite, random carrier-envelope phase, so the
expectation value of the electric field becomes a macroscopic oscillation.
This package simulates that process pulse by pulse and provides the
closed-form approximations, calibration fits and reports around it.
"""

__version__ = "0.1.0"

from .comb import CombMode, build_comb, cep_state_field, field_expectation, mode_function
from .config import ConfigError, ExperimentConfig, default_config, load_config, save_config
from .fitting import FitRejectedError, RateSeries, fit_offset_frequency
from .fock import (
    FockVector,
    InterferometerParams,
    ZeroStateError,
    annihilate,
    apply_jump,
    expect_b,
    expect_n,
    fidelity,
    inner_product,
    normalize,
    number_state,
    zero_state,
)
from .meas import (
    CountModel,
    DetectionImpossibleError,
    PulseRecord,
    TrajectoryRecord,
    detect_one,
    detection_probabilities,
    run_trajectory,
    simulate_pulse,
)
from .pipelines import (
    CalibrationResult,
    calibration_scan,
    field_emergence_report,
    run_trajectories,
    visibility_sweep,
)
from .poststates import (
    PhotonExhaustionError,
    best_cep_fidelity,
    binomial_gaussian_weights,
    binomial_post_state,
    cep_state,
    exact_post_state,
    gaussian_cosine_series,
    two_branch_post_state,
)
