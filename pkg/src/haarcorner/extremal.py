"""Extremal eigenvalue statistics of the corner-block spectrum at large n.

With gamma = q/p and pq/n -> 0, the normalized extremes converge almost
surely:

    (n lambda_max - p) / sqrt(pq)  ->  2 + sqrt(gamma)
    (n lambda_min - p) / sqrt(pq)  ->  sqrt(gamma) - 2

(the second limit is negative: n lambda_min concentrates near
(sqrt(p) - sqrt(q))^2 < p; its magnitude is 2 - sqrt(gamma)).

For p = q the ratio statistic (1/q) sqrt(lambda_max / lambda_min) is the
normalized condition number of the block, whose classical weak limits for
square Gaussian matrices are provided as reference CDFs below.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import jacobi
from .params import EnsembleParams


@dataclass(frozen=True)
class ExtremalSample:
    """Extremes of one eigenvalue draw, with the generating parameters."""

    lambda_max: float
    lambda_min: float
    params: EnsembleParams

    def __post_init__(self):
        if not (0.0 < self.lambda_min <= self.lambda_max < 1.0):
            raise ValueError("extremes must satisfy 0 < min <= max < 1")

    @property
    def gamma(self) -> float:
        return self.params.q / self.params.p


def extremal_batch(params: EnsembleParams, rng: np.random.Generator,
                   count: int):
    """(lambda_min, lambda_max) arrays over independent eigenvalue draws."""
    if params.p * params.q / params.n > 0.2:
        warnings.warn(
            f"pq/n = {params.p * params.q / params.n:.3f} > 0.2: outside the "
            "vanishing regime the limit laws describe", RuntimeWarning)
    c, cp = jacobi.sample_chain_batch(params, rng, count)
    lam = jacobi.spectra_batch(c, cp)
    return lam[:, 0].copy(), lam[:, -1].copy()


def sample_extremal(params: EnsembleParams,
                    rng: np.random.Generator) -> ExtremalSample:
    lo, hi = extremal_batch(params, rng, 1)
    return ExtremalSample(float(hi[0]), float(lo[0]), params)


def slln_normalize(sample: ExtremalSample, which: str) -> float:
    """(n * lambda - p) / sqrt(pq) for the chosen extreme."""
    n, p, q = sample.params.as_tuple()
    if which == "max":
        lam = sample.lambda_max
    elif which == "min":
        lam = sample.lambda_min
    else:
        raise ValueError("which must be 'max' or 'min'")
    return (n * lam - p) / math.sqrt(p * q)


def slln_limits(gamma: float) -> tuple[float, float]:
    """(max, min) limits of the normalized extremes: 2 + sqrt(gamma) and
    sqrt(gamma) - 2 (magnitude 2 - sqrt(gamma))."""
    return 2.0 + math.sqrt(gamma), math.sqrt(gamma) - 2.0


def tw_normalize_max(sample: ExtremalSample) -> float:
    """Fluctuation normalization of the largest eigenvalue for export:
    (pq)^{1/6} (sqrt(p) + sqrt(q))^{-4/3} (n lambda_max - (sqrt(p)+sqrt(q))^2).
    """
    n, p, q = sample.params.as_tuple()
    edge = (math.sqrt(p) + math.sqrt(q)) ** 2
    return (p * q) ** (1.0 / 6.0) / edge ** (2.0 / 3.0) \
        * (n * sample.lambda_max - edge)


def ratio_statistic(sample: ExtremalSample) -> float:
    """(1/q) sqrt(lambda_max / lambda_min); defined for square blocks."""
    if sample.params.p != sample.params.q:
        raise ValueError("ratio statistic requires p == q")
    return math.sqrt(sample.lambda_max / sample.lambda_min) / sample.params.q


def ratio_law_cdf(x) -> np.ndarray:
    """CDF exp(-4/x^2) of the density 8 x^{-3} exp(-4/x^2) on x > 0.

    This is the weak limit of the normalized condition number kappa/q of a
    square *complex* Gaussian matrix, and the reference law used by the
    soft acceptance check; see :func:`gaussian_condition_cdf` for the real
    case, which the sampled statistic follows empirically.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-4.0 / (x[pos] * x[pos]))
    return out if out.ndim else float(out)


def gaussian_condition_cdf(x) -> np.ndarray:
    """CDF exp(-2/x - 2/x^2): Edelman's limit of kappa/q for a square
    *real* Gaussian matrix."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-2.0 / x[pos] - 2.0 / (x[pos] * x[pos]))
    return out if out.ndim else float(out)


def ks_statistic(samples, cdf) -> float:
    """Sup distance between the empirical CDF of samples and a model CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("samples must be non-empty")
    n = xs.size
    fx = np.asarray(cdf(xs), dtype=np.float64)
    if np.any(fx < -1e-12) or np.any(fx > 1.0 + 1e-12) or np.any(np.diff(fx) < -1e-12):
        raise ValueError("cdf must be monotone into [0, 1] on the samples")
    upper = np.arange(1, n + 1) / n - fx
    lower = fx - np.arange(0, n) / n
    return float(np.max(np.maximum(upper, lower)))
