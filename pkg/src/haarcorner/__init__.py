"""Corner blocks of Haar orthogonal matrices: spectra, Fisher information
and KL divergence against the matching Gaussian ensemble."""

from .divergences import (LogNormalizer, LsiReport, check_lsi, estimate_kl,
                          estimate_importance, log_density_ratio,
                          log_normalizer, log_wishart_constant)
from .ensembles import (Spectrum, sample_corner_submatrix,
                        sample_gaussian_matrix, squared_singular_spectrum)
from .extremal import (ExtremalSample, gaussian_condition_cdf, ks_statistic,
                       ratio_law_cdf, ratio_statistic, sample_extremal,
                       slln_limits, slln_normalize, tw_normalize_max)
from .fisher import (ROUTES, estimate_fisher, fisher_asymptotic,
                     integrand_gradient, integrand_spectral)
from .harness import ConfigError, OutputRecord, RunConfig, run_experiment
from .jacobi import (BetaChain, BidiagonalModel, build_bidiagonal,
                     jacobi_logdensity_unnormalized, jacobi_spectrum,
                     resolvent_traces_via_v, sample_beta, sample_beta_chain)
from .mc import MCEstimate, merge_estimates, sample_stream
from .moments import (ExpansionValue, beta_inverse_moment, expected_trace,
                      resolvent_expansion, theorem_assembly)
from .params import EnsembleParams

__version__ = "0.1.0"

__all__ = [
    "BetaChain", "BidiagonalModel", "ConfigError", "EnsembleParams",
    "ExpansionValue", "ExtremalSample", "LogNormalizer", "LsiReport",
    "MCEstimate", "OutputRecord", "ROUTES", "RunConfig", "Spectrum",
    "beta_inverse_moment", "build_bidiagonal", "check_lsi",
    "estimate_fisher", "estimate_importance", "estimate_kl",
    "expected_trace", "fisher_asymptotic", "gaussian_condition_cdf",
    "integrand_gradient", "integrand_spectral",
    "jacobi_logdensity_unnormalized", "jacobi_spectrum", "ks_statistic",
    "log_density_ratio", "log_normalizer", "log_wishart_constant",
    "merge_estimates", "ratio_law_cdf", "ratio_statistic",
    "resolvent_expansion", "resolvent_traces_via_v", "run_experiment",
    "sample_beta", "sample_beta_chain", "sample_corner_submatrix",
    "sample_extremal", "sample_gaussian_matrix", "sample_stream",
    "slln_limits", "slln_normalize", "squared_singular_spectrum",
    "theorem_assembly", "tw_normalize_max",
]
