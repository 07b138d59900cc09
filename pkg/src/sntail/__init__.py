"""Tail dependence of the equi-skewed bivariate skew normal law.

Exact tail quantities by log-domain numerics alongside their closed-form
asymptotic rates.
"""

from .bivariate import (
    BivSkewNormalLaw,
    SampleBatch,
    biv_log_pdf,
    biv_pdf,
    derive_params,
    joint_diag_log_cdf,
    joint_diag_tail_asymptotic,
    sample,
    sample_z_star,
)
from .errors import (
    BelowValidityRangeError,
    ConvergenceError,
    DomainError,
    InsufficientSamplesError,
    OutOfAsymptoticRangeError,
    SNTailError,
    UnsupportedBranchError,
    UnsupportedShapeError,
)
from .quadrature import DEFAULT_QUAD, QuadSpec
from .specfun import (
    TailFormCoefficients,
    lambert_w0,
    log_std_normal_cdf,
    owen_t,
    solve_tail_form,
    std_normal_cdf,
    std_normal_quantile,
    std_normal_quantile_asymptotic,
)
from .taildep import (
    DeHaanCheck,
    MCEstimate,
    TailOrderFit,
    TailPoint,
    conditional_tail_derivative,
    de_haan_check,
    estimate_lambda_l_mc,
    fit_tail_order,
    kappa_target,
    lambda_l_asymptotic,
    lambda_l_exact,
    lambda_u_asymptotic,
    lambda_u_exact,
    normal_baseline,
    tail_table,
)
from .univariate import (
    SkewNormalLaw,
    capitanio_bounds,
    marginal_lambda,
    sn_cdf,
    sn_log_cdf,
    sn_log_pdf,
    sn_log_tail_cdf,
    sn_pdf,
    sn_ppf,
    sn_quantile,
    sn_quantile_asymptotic,
    sn_quantile_lambert,
    sn_tail_asymptotic,
)

__version__ = "0.1.0"
