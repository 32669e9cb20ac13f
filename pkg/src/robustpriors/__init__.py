"""Heavy-tailed coefficient priors for conflict-robust Bayesian regression.

The package provides the prior families (standard normal, Student,
log-Pareto-tailed normal, constant-tailed normal), the joint posterior of a
linear model in unconstrained ``(beta, log sigma)`` coordinates with exact
gradients, a Hamiltonian Monte Carlo sampler, closed-form and quadrature
oracles for the reduced two-parameter study target, and numerical checks of
the prior-data conflict-resolution limits.
"""

__version__ = "0.1.0"

from .priors import CTN, LPTN, CoefficientPrior, Normal, Student
from .model import (DataError, InverseGammaSigmaSq, JeffreysSigma,
                    PosteriorTarget, PowerAdjustedSigma, RegressionData,
                    load_csv, ols_fit, reduced_target, standardize)
from .oracle import (ConjugateResult, NumericalError, QuadratureResult,
                     conjugate_posterior, inverse_gamma_mean,
                     inverse_gamma_sd, jeffreys_benchmark,
                     limiting_reduced_target, limiting_sigma_posterior,
                     limiting_target_ctn, limiting_target_resolved,
                     quadrature_moments)
from .sampler import (Chain, DivergenceError, HmcConfig, PosteriorSummary,
                      ess_imse, leapfrog, sample, save_chains, summarize)
from .asymptotics import (ConflictPath, RatioSeries, ScalingTrace,
                          SummaryComparison, limiting_summary_comparison,
                          lptn_scaling_trace, marginal_ratio_convergence,
                          prior_limit_ctn, prior_ratio_lptn,
                          prior_ratio_student, write_series_csv)

__all__ = [
    "__version__",
    "Normal", "Student", "LPTN", "CTN", "CoefficientPrior",
    "RegressionData", "standardize", "ols_fit", "load_csv", "DataError",
    "JeffreysSigma", "InverseGammaSigmaSq", "PowerAdjustedSigma",
    "PosteriorTarget", "reduced_target",
    "HmcConfig", "Chain", "PosteriorSummary", "DivergenceError",
    "leapfrog", "sample", "summarize", "ess_imse", "save_chains",
    "ConjugateResult", "QuadratureResult", "NumericalError",
    "conjugate_posterior", "jeffreys_benchmark", "limiting_sigma_posterior",
    "inverse_gamma_mean", "inverse_gamma_sd", "limiting_reduced_target",
    "limiting_target_resolved", "limiting_target_ctn", "quadrature_moments",
    "ConflictPath", "RatioSeries", "ScalingTrace", "SummaryComparison",
    "prior_ratio_student", "prior_ratio_lptn", "lptn_scaling_trace",
    "prior_limit_ctn", "marginal_ratio_convergence",
    "limiting_summary_comparison", "write_series_csv",
]
