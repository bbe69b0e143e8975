"""Estimation of bandlimited fields sampled at unknown AR(1)-spaced locations."""
from .bounds import BoundSet, compute_bounds, density_threshold, fit_envelope, theorem_envelope
from .estimator import (
    DistortionReport,
    EstimatedCoefficients,
    coefficient_distortion,
    estimate,
    integral_distortion,
    reconstruct,
)
from .experiment import (
    DistortionCurve,
    ExperimentConfig,
    FieldSeed,
    fit_loglog_slope,
    monte_carlo,
    run_trial,
    trial_rng,
)
from .field import (
    PAPER_FIELD,
    FourierCoefficients,
    derivative_bound,
    evaluate,
    exact_coefficients,
    normalize_sup,
    random_field,
)
from .noise import NoiseSpec, corrupt
from .sampling import (
    ARConfig,
    RenewalSpec,
    SamplePath,
    closed_form_location,
    draw_renewal,
    generate_path,
    grid_deviation,
    path_report,
)

__version__ = "0.1.0"
