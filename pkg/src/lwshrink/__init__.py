"""Translation-invariant linear covariance shrinkage with unknown mean."""

__version__ = "0.1.0"

from .linalg import (
    Gaussian,
    MixedStudent,
    ObservationMatrix,
    PopulationModel,
    Student,
    SymmetricMatrix,
    demean,
    frob_norm_sq,
    identity,
    inner,
    sample_covariance,
)
from .oracle import (
    OptimalProjection,
    OracleScalars,
    analytic_scalars,
    expected_sample_loss,
    gaussian_beta2,
    loss,
    optimal_sigma_starstar,
    oracle_sigma_star,
    population_mu_alpha2,
    student_beta2,
    theta2_monte_carlo,
)
from .sampling import (
    SamplerConfig,
    draw,
    eighth_moment_constant,
    random_wishart_sigma,
    sample,
    sample_gaussian,
    sample_mixed_student,
    sample_student,
)
from .shrinkage import (
    CoefficientSet,
    ShrinkageResult,
    ShrinkageScalars,
    coefficient_set,
    estimate,
    scalar_b2_variant_u,
    scalar_bbar2,
    scalar_bbar2_r,
    scalar_d2,
    scalar_m,
)

__all__ = [
    "CoefficientSet",
    "Gaussian",
    "MixedStudent",
    "ObservationMatrix",
    "OptimalProjection",
    "OracleScalars",
    "PopulationModel",
    "SamplerConfig",
    "ShrinkageResult",
    "ShrinkageScalars",
    "Student",
    "SymmetricMatrix",
    "analytic_scalars",
    "coefficient_set",
    "demean",
    "draw",
    "eighth_moment_constant",
    "estimate",
    "expected_sample_loss",
    "frob_norm_sq",
    "gaussian_beta2",
    "identity",
    "inner",
    "loss",
    "optimal_sigma_starstar",
    "oracle_sigma_star",
    "population_mu_alpha2",
    "random_wishart_sigma",
    "sample",
    "sample_covariance",
    "sample_gaussian",
    "sample_mixed_student",
    "sample_student",
    "scalar_b2_variant_u",
    "scalar_bbar2",
    "scalar_bbar2_r",
    "scalar_d2",
    "scalar_m",
    "student_beta2",
    "theta2_monte_carlo",
]
