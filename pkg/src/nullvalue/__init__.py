"""Null-value state discrimination: partial-collapse measurements with
tuned postselection, single-copy error analysis, multi-copy SNR
statistics, and a photon-counting simulation of the optical realization.
"""

__version__ = "0.1.0"

from .errors import InsufficientDataError, NumericalDegeneracyError
from .states import (ATOL_ALGEBRA, BlochAngles, PureState, orthogonal_complement,
                     overlap_probability, state, state_from_angles)
from .povm import (KrausPair, PovmTriple, TreeProbabilities,
                   hermitian_eigenvalues, is_hermitian,
                   is_positive_semidefinite, make_kraus, make_povm, projector,
                   tree_probabilities)
from .single_copy import (CapPrior, OrientationOptimum, SingleCopyReport,
                          cap_averaged_confusion, cap_averaged_error,
                          cap_averaged_intermediate, intermediate_report,
                          min_error_prob, optimize_orientations)
from .protocol import (SchemeConfig, conditional_nv_prob, null_value,
                       resolve_scheme_a, resolve_scheme_b)
from .multicopy import (CountRecord, SnrReport, expected_counts,
                        nv_signal_partials, signal_nv, signal_std,
                        simulate_counts, snr_nv, snr_nv_asymptotic, snr_std,
                        snr_std_small_angle, z_critical)
from .experiment import (BinnedCounts, ExperimentConfig, WindowOutcome,
                         channel_probabilities, estimate_snr_from_bins,
                         fit_ellipticity, prepare_input, run_experiment,
                         window_interaction)

__all__ = [
    "ATOL_ALGEBRA", "BlochAngles", "BinnedCounts", "CapPrior", "CountRecord",
    "ExperimentConfig", "InsufficientDataError", "KrausPair",
    "NumericalDegeneracyError", "OrientationOptimum", "PovmTriple",
    "PureState", "SchemeConfig", "SingleCopyReport", "SnrReport",
    "TreeProbabilities", "WindowOutcome", "cap_averaged_confusion",
    "cap_averaged_error", "cap_averaged_intermediate", "channel_probabilities",
    "conditional_nv_prob", "estimate_snr_from_bins", "expected_counts",
    "fit_ellipticity",
    "hermitian_eigenvalues", "intermediate_report", "is_hermitian",
    "is_positive_semidefinite", "make_kraus", "make_povm", "min_error_prob",
    "null_value", "nv_signal_partials", "optimize_orientations",
    "orthogonal_complement", "overlap_probability", "prepare_input",
    "projector", "resolve_scheme_a", "resolve_scheme_b", "run_experiment",
    "signal_nv", "signal_std", "simulate_counts", "snr_nv",
    "snr_nv_asymptotic", "snr_std", "snr_std_small_angle", "state",
    "state_from_angles", "tree_probabilities", "window_interaction",
    "z_critical",
]
