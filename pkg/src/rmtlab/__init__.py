"""Monte Carlo laboratory for trace-of-powers statistics of rotationally
invariant random matrix ensembles."""

from .ensembles import (
    CustomRadial,
    EnsembleSpec,
    FixedNorm,
    GaussianCoords,
    TwoFrame,
    haar_two_frame,
    make_ensemble,
    radial_deficit_t,
    sample,
)
from .oracle import exact_trace_moment, mean_recursion_check, sphere_monomial_moment
from .spaces import MatrixSpace, SpaceKind, build_space, hs_norm, inner_product
from .stein import (
    LimitReport,
    PairSample,
    drift_closed_form,
    empirical_limits,
    q_covariance_check,
    quadratic_closed_form,
    rotate_pair,
)
from .theory import (
    CovarianceModel,
    MeanPrediction,
    catalan,
    check_sigma,
    corollary_covariance,
    covariance_model,
    predicted_means,
)
from .traces import (
    CenteredVector,
    PolynomialTestFunction,
    TraceVector,
    center_z,
    linear_statistic,
    trace_powers,
)

__version__ = "0.1.0"

__all__ = [
    "CenteredVector",
    "CovarianceModel",
    "CustomRadial",
    "EnsembleSpec",
    "FixedNorm",
    "GaussianCoords",
    "LimitReport",
    "MatrixSpace",
    "MeanPrediction",
    "PairSample",
    "PolynomialTestFunction",
    "SpaceKind",
    "TraceVector",
    "TwoFrame",
    "build_space",
    "catalan",
    "center_z",
    "check_sigma",
    "corollary_covariance",
    "covariance_model",
    "drift_closed_form",
    "empirical_limits",
    "exact_trace_moment",
    "haar_two_frame",
    "hs_norm",
    "inner_product",
    "linear_statistic",
    "make_ensemble",
    "mean_recursion_check",
    "predicted_means",
    "q_covariance_check",
    "quadratic_closed_form",
    "radial_deficit_t",
    "rotate_pair",
    "sample",
    "sphere_monomial_moment",
    "trace_powers",
    "__version__",
]
