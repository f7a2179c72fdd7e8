"""Amplitude amplification driven by a weakly measured while loop.

Simulators for the weak-measurement loop, the test-restart loop and the
standard algorithm, with Monte Carlo and two-sample statistics helpers.
"""

from .errors import CappedRunError, ConfigurationError, ConsistencyError, DomainError
from .geometry import (AngleState, ProblemParams, bot_trajectory, grover_rotation,
                       kappa_upper_bound, post_bot_angle, recurrence_step, theta_offset,
                       top_probability)
from .montecarlo import SampleMeta, SampleSet, monte_carlo
from .runners import (RunConfig, TrialRecord, run_standard, run_test_restart, run_weak,
                      trial_rng)
from .stats import (ECDF, SegmentReport, TestResult, ad_two_sample, ecdf, ks_two_sample,
                    segment_active_latent)

__version__ = "0.1.0"

__all__ = [
    "AngleState", "CappedRunError", "ConfigurationError", "ConsistencyError", "DomainError",
    "ECDF", "ProblemParams", "RunConfig", "SampleMeta", "SampleSet", "SegmentReport",
    "TestResult", "TrialRecord", "ad_two_sample", "bot_trajectory", "ecdf", "grover_rotation",
    "kappa_upper_bound", "ks_two_sample", "monte_carlo", "post_bot_angle", "recurrence_step",
    "run_standard", "run_test_restart", "run_weak", "segment_active_latent", "theta_offset",
    "top_probability", "trial_rng",
]
