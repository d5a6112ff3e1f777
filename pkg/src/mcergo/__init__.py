"""Ergodicity certificates for finite-state nonlinear Markov chains.

The package constructs the markovian coupling of the linear chain under a
measure-dependent kernel, measures how fast the coupled pair meets through
the spectral radius of the pair operator, and turns that rate into checked
convergence certificates for the nonlinear flow.
"""

from .coefficients import (
    CoefficientCertificate,
    SamplerConfig,
    c_k_bound,
    c_k_recursion_bound,
    dobrushin_kappa,
    gamma_perturbation,
    lipschitz_lambda,
    lipschitz_lambda_k_estimate,
    md_alpha_linear,
    md_alpha_nonlinear,
)
from .convergence import (
    BoundCheck,
    ErgodicityReport,
    PerturbationBound,
    PerturbationCheck,
    RateRow,
    butkovsky_bound,
    density_ratio_trajectory,
    empirical_decay_rate,
    gamma_threshold,
    n_delta_surrogate,
    perturbation_bound,
    rate_comparison,
    shchegolev_bound,
    theorem_constant,
    tv_decay,
    verify_main_bound,
)
from .coupling import (
    CoupledSimulation,
    CouplingOperator,
    CouplingStep,
    PairIndex,
    build_v_hat,
    initial_coupling,
    marginal_law_exact,
    residual_densities,
    simulate_coupled,
    uncoupled_probability_exact,
)
from .errors import (
    AssumptionViolationError,
    DimensionError,
    InvalidDistributionError,
    InvalidMatrixError,
    SearchFailedError,
    SpecFormatError,
    UndefinedRatioError,
)
from .kernels import (
    NonlinearKernelSpec,
    PerturbationTerm,
    SpecValidation,
    StochasticMatrix,
    evaluate,
    flow,
    k_step_kernel,
    k_step_matrix,
    linear_power,
    rational_matrix,
    validate_spec,
)
from .measures import Distribution, dirac, sample_simplex, tv_distance
from .spectral import (
    FrobeniusResult,
    SpectrumResult,
    eigenvalues,
    frobenius_constant,
    gelfand_sequence,
    spectral_radius,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolationError",
    "BoundCheck",
    "CoefficientCertificate",
    "CoupledSimulation",
    "CouplingOperator",
    "CouplingStep",
    "DimensionError",
    "Distribution",
    "ErgodicityReport",
    "FrobeniusResult",
    "InvalidDistributionError",
    "InvalidMatrixError",
    "NonlinearKernelSpec",
    "PairIndex",
    "PerturbationBound",
    "PerturbationCheck",
    "PerturbationTerm",
    "RateRow",
    "SamplerConfig",
    "SearchFailedError",
    "SpecFormatError",
    "SpecValidation",
    "SpectrumResult",
    "StochasticMatrix",
    "UndefinedRatioError",
    "butkovsky_bound",
    "build_v_hat",
    "c_k_bound",
    "c_k_recursion_bound",
    "density_ratio_trajectory",
    "dirac",
    "dobrushin_kappa",
    "eigenvalues",
    "empirical_decay_rate",
    "evaluate",
    "flow",
    "frobenius_constant",
    "gamma_perturbation",
    "gamma_threshold",
    "gelfand_sequence",
    "initial_coupling",
    "k_step_kernel",
    "k_step_matrix",
    "linear_power",
    "lipschitz_lambda",
    "lipschitz_lambda_k_estimate",
    "marginal_law_exact",
    "md_alpha_linear",
    "md_alpha_nonlinear",
    "n_delta_surrogate",
    "perturbation_bound",
    "rate_comparison",
    "rational_matrix",
    "residual_densities",
    "sample_simplex",
    "shchegolev_bound",
    "simulate_coupled",
    "spectral_radius",
    "theorem_constant",
    "tv_decay",
    "tv_distance",
    "uncoupled_probability_exact",
    "validate_spec",
    "verify_main_bound",
]
