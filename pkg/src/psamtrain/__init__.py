"""Pilot-based training design for adaptive binary signaling over
correlated Rayleigh fading."""
from .estimator import (CAUSAL, NONCAUSAL, ErrorProfile, PilotPattern,
                        causal_error_variance_gm, error_variance_at,
                        error_variance_profile, pilot_index_set)
from .fading import GaussMarkov, Jakes, autocorrelation, autocovariance_matrix
from .grid import IsubGrid, build_grid, interpolate, load_grid, save_grid
from .mi import (BinaryInput, DEFAULT_QUADRATURE, Quadrature, conditional_mi,
                 expected_mi, optimize_isub)
from .policy import (FramePlan, PolicyResult, frame_rate, no_training_baseline,
                     optimize_all, optimize_policy_I, optimize_policy_II,
                     optimize_policy_III, optimize_policy_IV)

__version__ = "0.1.0"
