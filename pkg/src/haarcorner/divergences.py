"""Log-density machinery and KL divergence against the Gaussian block.

The density ratio of sqrt(n) Z against a same-shape standard Gaussian is

    (f/g)(z) = B * det(I_q - z'z/n)^c * exp(tr(z'z)/2)   on the support,

with c = (n - p - q - 1)/2 and log B assembled from Wishart-type
normalizers in log space:

    log B = -(pq/2) log n + log w(n - p, q) - log w(n, q),
    1 / w(s, t) = pi^{t(t-1)/4} * 2^{st/2} * prod_{j=1}^t Gamma((s-j+1)/2).

In spectral coordinates log(f/g) = log B + c sum log(1 - lambda_k)
+ (n/2) sum lambda_k, which is what the KL estimator averages.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import jacobi
from .ensembles import Spectrum
from .mc import MCEstimate, run_blocked
from .params import EnsembleParams


def log_wishart_constant(s: float, t: int) -> float:
    """log w(s, t); requires s > t - 1.  Stable up to s ~ 1e9."""
    if t < 1 or int(t) != t:
        raise ValueError("t must be a positive integer")
    if not s > t - 1:
        raise ValueError(f"require s > t - 1, got s={s}, t={t}")
    j = np.arange(1, t + 1)
    return float(-(t * (t - 1) / 4.0) * math.log(math.pi)
                 - (s * t / 2.0) * math.log(2.0)
                 - gammaln((s - j + 1) / 2.0).sum())


@dataclass(frozen=True)
class LogNormalizer:
    """log of the density-ratio constant B for one parameter triple."""

    log_B: float


def log_normalizer(params: EnsembleParams) -> LogNormalizer:
    n, p, q = params.require_density().as_tuple()
    log_b = (-(p * q / 2.0) * math.log(n)
             + log_wishart_constant(n - p, q)
             - log_wishart_constant(n, q))
    return LogNormalizer(log_b)


def log_density_ratio(spec: Spectrum, params: EnsembleParams,
                      normalizer: LogNormalizer | None = None) -> float:
    """log(f/g) at a sample with the given Z'Z spectrum."""
    params.require_density()
    if normalizer is None:
        normalizer = log_normalizer(params)
    lam = spec.to_lambda(params.n).values
    if np.any(lam >= 1.0) or np.any(lam < 0.0):
        raise ValueError("spectrum outside [0, 1): sample is out of support")
    return float(normalizer.log_B
                 + params.c_n * np.log1p(-lam).sum()
                 + 0.5 * params.n * lam.sum())


def _log_ratio_kernel(params: EnsembleParams, transform=None):
    log_b = log_normalizer(params).log_B
    c_n, n = params.c_n, params.n

    def kernel(rng: np.random.Generator, count: int):
        c, cp = jacobi.sample_chain_batch(params, rng, count)
        values = (log_b
                  + c_n * jacobi.log_complement_sum_batch(c, cp)
                  + 0.5 * n * jacobi.lambda_sum_batch(c, cp))
        if transform is not None:
            values = transform(values)
        keep = np.isfinite(values)
        return values[keep], int(count - keep.sum())
    return kernel


def estimate_kl(params: EnsembleParams, n_samples: int, seed: int, *,
                workers: int = 1) -> MCEstimate:
    """Monte-Carlo estimate of E_f[log(f/g)] over eigenvalue-law draws."""
    params.require_density()
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    return run_blocked(_log_ratio_kernel(params), n_samples, seed,
                       workers=workers,
                       provenance=params.as_tuple() + ("kl",))


def estimate_importance(params: EnsembleParams, n_samples: int, seed: int, *,
                        workers: int = 1) -> MCEstimate:
    """Monte-Carlo estimate of E_f[exp(-log(f/g))] = E_f[g/f].

    Equals the g-probability of the spectral support, which is 1 up to an
    exponentially small defect; the sharpest joint test that the constant
    B and both spectral terms of the log ratio are correct.
    """
    params.require_density()
    kernel = _log_ratio_kernel(params, transform=lambda v: np.exp(-v))
    return run_blocked(kernel, n_samples, seed, workers=workers,
                       provenance=params.as_tuple() + ("importance",))


@dataclass(frozen=True)
class LsiReport:
    """Empirical check of 2 * KL <= Fisher with statistical slack."""

    params: tuple
    kl_mean: float
    fisher_mean: float
    slack: float
    combined_stderr: float
    holds: bool


def check_lsi(kl: MCEstimate, fisher: MCEstimate) -> LsiReport:
    """Evaluate 2 * kl.mean <= fisher.mean + 3 * combined standard error."""
    if kl.provenance is None or fisher.provenance is None:
        raise ValueError("both estimates must carry provenance")
    if kl.provenance[:3] != fisher.provenance[:3]:
        raise ValueError(
            f"parameter mismatch: {kl.provenance[:3]} vs {fisher.provenance[:3]}")
    combined = math.hypot(2.0 * kl.stderr, fisher.stderr)
    slack = fisher.mean - 2.0 * kl.mean
    return LsiReport(
        params=kl.provenance[:3],
        kl_mean=kl.mean,
        fisher_mean=fisher.mean,
        slack=slack,
        combined_stderr=combined,
        holds=bool(2.0 * kl.mean <= fisher.mean + 3.0 * combined),
    )
