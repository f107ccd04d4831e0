"""Extremal dependence coefficients for block-partitioned max-stable vectors."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .coefficients import (
    CoefficientReport,
    chi_margin_pair,
    chi_pair,
    coefficient_report,
    epsilon,
    epsilon_block,
    epsilon_bounds,
    epsilon_pair,
    kappa_block,
    kappa_pair,
    madogram_nu,
    moment_e,
)
from .errors import (
    ConfigError,
    DataError,
    ExtdepError,
    ModelError,
    NotSimulableError,
)
from .estimation import (
    Dataset,
    EstimateResult,
    bootstrap_se,
    empirical_margins,
    estimate_chi_np,
    estimate_epsilon_ml,
    estimate_epsilon_np,
    estimate_kappa_hill,
    estimate_nu_np,
    fit_frechet_margin,
)
from .families import (
    CopulaComponent,
    InvertedMev,
    InvertedMevSpec,
    MixtureModelSpec,
    closed_form_coefficients,
    make_asymmetric_logistic,
    make_comonotone,
    make_independence,
    make_inverted_mev,
    make_logistic,
    make_min_product_mixture,
    make_mixture,
)
from .model import (
    ExponentFunction,
    MarginSpec,
    MaxStableModel,
    Partition,
    check_max_stability,
    copula_eval,
    eval_exponent,
    joint_cdf,
    partition_maxima_cdf,
    restrict,
)
from .simulation import (
    SampleBatch,
    sample_inverted_mev,
    sample_logistic_mev,
    sample_mixture_model,
    sample_positive_stable,
    simulate,
)
