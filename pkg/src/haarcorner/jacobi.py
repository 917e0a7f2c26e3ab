"""O(q)-per-draw sampling of the corner-block eigenvalue law.

The ascending eigenvalues (lambda_1, ..., lambda_q) of Z'Z for a Haar
corner block follow a beta-Jacobi law; (1 - lambda_i) are realized as the
squared singular values of a q x q lower bidiagonal matrix D built from
independent beta variates:

    D[i, i]     = x_i = sqrt(c_i * c'_{i+1})          (c'_{q+1} = 1)
    D[i, i - 1] = y_i = -sqrt(s_i * s'_i), i >= 2

    c_i  ~ Beta((n - p - i + 1)/2, (p - i + 1)/2),  i = 1..q
    c'_i ~ Beta((n - q - i + 2)/2, (q - i + 1)/2),  i = 2..q
    s_i = 1 - c_i,  s'_i = 1 - c'_i,  all variates independent.

The inverse V = D^{-1} is lower triangular with closed-form entries, and
sum_k (1 - lambda_k)^{-1} = sum v_ij^2,
sum_k (1 - lambda_k)^{-2} = ||V'V||_F^2,
which lets the resolvent traces be evaluated without any eigensolve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._bdsvd import _spectra_from_bands, bidiagonal_singular_values
from .ensembles import Spectrum
from .params import EnsembleParams

_diagnostics = {"beta_resamples": 0}


def beta_resample_count() -> int:
    """Number of beta draws redrawn because they rounded to 0 or 1."""
    return _diagnostics["beta_resamples"]


@dataclass(frozen=True)
class BetaChain:
    """The independent beta variates driving one bidiagonal draw.

    ``c`` stores c_1..c_q.  ``cp`` stores c'_2..c'_{q+1} (so ``cp[i-1]``
    is c'_{i+1}, the factor paired with c_i on the diagonal); its trailing
    entry is the convention c'_{q+1} = 1.
    """

    c: np.ndarray
    cp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.float64))
        object.__setattr__(self, "cp", np.asarray(self.cp, dtype=np.float64))
        if self.c.shape != self.cp.shape or self.c.ndim != 1:
            raise ValueError("c and cp must be 1-d arrays of equal length")
        if self.cp[-1] != 1.0:
            raise ValueError("cp must end with the convention entry 1.0")
        inner = np.concatenate([self.c, self.cp[:-1]])
        if np.any(inner <= 0.0) or np.any(inner >= 1.0):
            raise ValueError("chain entries must lie strictly in (0, 1)")

    @property
    def q(self) -> int:
        return self.c.size

    @property
    def s(self) -> np.ndarray:
        """1 - c_i (exact complement)."""
        return 1.0 - self.c

    @property
    def sp(self) -> np.ndarray:
        """1 - c'_{i+1}, aligned with ``cp``."""
        return 1.0 - self.cp


@dataclass(frozen=True)
class BidiagonalModel:
    """Lower bidiagonal q x q matrix: positive diagonal, negative subdiagonal."""

    diag: np.ndarray
    subdiag: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=np.float64))
        object.__setattr__(self, "subdiag",
                           np.asarray(self.subdiag, dtype=np.float64))
        if self.subdiag.shape != (self.diag.size - 1,):
            raise ValueError("subdiag must have length len(diag) - 1")

    def dense(self) -> np.ndarray:
        q = self.diag.size
        m = np.zeros((q, q))
        idx = np.arange(q)
        m[idx, idx] = self.diag
        m[idx[1:], idx[:-1]] = self.subdiag
        return m


def chain_beta_parameters(params: EnsembleParams):
    """(alpha_c, beta_c, alpha_cp, beta_cp) arrays for the chain laws."""
    n, p, q = params.n, params.p, params.q
    i = np.arange(1, q + 1)
    ac = (n - p - i + 1) / 2.0
    bc = (p - i + 1) / 2.0
    j = np.arange(2, q + 1)
    acp = (n - q - j + 2) / 2.0
    bcp = (q - j + 1) / 2.0
    return ac, bc, acp, bcp


def sample_beta(alpha: float, beta: float, rng: np.random.Generator,
                size: int | None = None):
    """Beta(alpha, beta) draw(s) as G1 / (G1 + G2) with Gamma(., 1) parts.

    Values that round to exactly 0 or 1 are redrawn (and counted), so the
    result lies strictly inside (0, 1).
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    shape = () if size is None else (size,)
    g1 = rng.standard_gamma(alpha, size=shape)
    g2 = rng.standard_gamma(beta, size=shape)
    out = g1 / (g1 + g2)
    bad = (out <= 0.0) | (out >= 1.0)
    while np.any(bad):
        nbad = int(np.count_nonzero(bad))
        _diagnostics["beta_resamples"] += nbad
        g1b = rng.standard_gamma(alpha, size=nbad)
        g2b = rng.standard_gamma(beta, size=nbad)
        if size is None:
            out = np.asarray(g1b[0] / (g1b[0] + g2b[0]))
        else:
            out[bad] = g1b / (g1b + g2b)
        bad = (out <= 0.0) | (out >= 1.0)
    return float(out) if size is None else out


def _beta_matrix(rng: np.random.Generator, alpha: np.ndarray,
                 beta: np.ndarray, count: int) -> np.ndarray:
    """(count, len(alpha)) matrix of independent Beta(alpha_j, beta_j) draws."""
    k = alpha.size
    g1 = rng.standard_gamma(alpha, size=(count, k))
    g2 = rng.standard_gamma(beta, size=(count, k))
    out = g1 / (g1 + g2)
    bad = (out <= 0.0) | (out >= 1.0)
    while np.any(bad):
        rows, cols = np.nonzero(bad)
        _diagnostics["beta_resamples"] += rows.size
        g1b = rng.standard_gamma(alpha[cols])
        g2b = rng.standard_gamma(beta[cols])
        out[rows, cols] = g1b / (g1b + g2b)
        bad = (out <= 0.0) | (out >= 1.0)
    return out


def sample_chain_batch(params: EnsembleParams, rng: np.random.Generator,
                       count: int):
    """(c, cp) arrays of shape (count, q); cp's last column is ones."""
    params.require_density()
    ac, bc, acp, bcp = chain_beta_parameters(params)
    c = _beta_matrix(rng, ac, bc, count)
    if params.q > 1:
        cp_inner = _beta_matrix(rng, acp, bcp, count)
    else:
        cp_inner = np.empty((count, 0))
    cp = np.concatenate([cp_inner, np.ones((count, 1))], axis=1)
    return c, cp


def sample_beta_chain(params: EnsembleParams,
                      rng: np.random.Generator) -> BetaChain:
    c, cp = sample_chain_batch(params, rng, 1)
    return BetaChain(c[0], cp[0])


def build_bidiagonal(chain: BetaChain) -> BidiagonalModel:
    """Deterministic map from a chain to the bidiagonal matrix D."""
    x = np.sqrt(chain.c * chain.cp)
    # s'_i for i = 2..q sits at cp positions 0..q-2 (cp[i-2] = c'_i)
    y = -np.sqrt(chain.s[1:] * (1.0 - chain.cp[:-1]))
    return BidiagonalModel(x, y)


def _bands_batch(c: np.ndarray, cp: np.ndarray):
    x = np.sqrt(c * cp)
    y = -np.sqrt((1.0 - c[:, 1:]) * (1.0 - cp[:, :-1]))
    return x, y


def spectra_batch(c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """(count, q) ascending eigenvalue draws from stacked chains."""
    x, y = _bands_batch(c, cp)
    lam, status = _spectra_from_bands(np.ascontiguousarray(x),
                                      np.ascontiguousarray(y))
    if status != 0:  # iteration cap in some row: redo those rows densely
        for k in range(x.shape[0]):
            model = BidiagonalModel(x[k], y[k])
            sv = np.sort(np.linalg.svd(model.dense(), compute_uv=False))
            lam[k] = np.sort(1.0 - sv * sv)
    return lam


def jacobi_spectrum(model: BidiagonalModel) -> Spectrum:
    """Ascending eigenvalues 1 - sigma_k(D)^2 of I - D'D.

    Singular values come from the dedicated bidiagonal QR routine; the
    Gram matrix D'D is never formed.  Values outside [0, 1] by more than
    1e-12 indicate a flagged (unusable) draw.
    """
    sv = bidiagonal_singular_values(model.diag, model.subdiag)
    lam = np.sort(1.0 - sv * sv)
    if np.any(lam < -1e-12) or np.any(lam > 1.0 + 1e-12):
        raise ValueError("eigenvalue outside [0, 1] beyond tolerance; "
                         "flag and discard this draw")
    return Spectrum(lam, "lambda")


def lambda_sum_batch(c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """sum_k lambda_k = q - tr(D'D), in O(q) per row."""
    q = c.shape[1]
    trace = (c * cp).sum(axis=1)
    trace += ((1.0 - c[:, 1:]) * (1.0 - cp[:, :-1])).sum(axis=1)
    return q - trace


def log_complement_sum_batch(c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """sum_k log(1 - lambda_k) = log det(D'D) = sum log(c_i c'_{i+1})."""
    return np.log(c).sum(axis=1) + np.log(cp).sum(axis=1)


def _v_squared_batch(c: np.ndarray, cp: np.ndarray) -> np.ndarray:
    """(count, q, q) squared entries of V = D^{-1} from the closed form.

    v_ii^2 = 1 / (c_i c'_{i+1});  for j < i,
    v_ij^2 = (1 / (c'_{i+1} c_j)) * prod_{l=j+1}^{i} (s_l s'_l) / (c_l c'_l),
    evaluated by the left-to-right recurrence
    v_ij^2 = v_i,j+1^2 * (s_{j+1} s'_{j+1}) / (c_j c'_{j+1}).
    """
    count, q = c.shape
    v2 = np.zeros((count, q, q))
    s = 1.0 - c
    spv = 1.0 - cp  # spv[:, i-2] = s'_i
    for i in range(q):
        v2[:, i, i] = 1.0 / (c[:, i] * cp[:, i])
        for j in range(i - 1, -1, -1):
            v2[:, i, j] = v2[:, i, j + 1] * (s[:, j + 1] * spv[:, j]) \
                / (c[:, j] * cp[:, j])
    return v2


def resolvent_traces_batch(c: np.ndarray, cp: np.ndarray):
    """(T1, T2) per row: tr((I - DD')^{-k}) for k = 1, 2, eigensolve-free.

    T1 is the entrywise square sum of V; T2 the squared Frobenius norm of
    V'V, assembled densely (O(q^3) per row, acceptable at the small q used
    everywhere here).
    """
    v2 = _v_squared_batch(c, cp)
    t1 = v2.sum(axis=(1, 2))
    v = np.sqrt(v2)
    w = np.einsum("bij,bik->bjk", v, v)
    t2 = (w * w).sum(axis=(1, 2))
    return t1, t2


def resolvent_traces_via_v(chain: BetaChain) -> tuple[float, float]:
    """(sum (1-lambda)^{-1}, sum (1-lambda)^{-2}) for one chain."""
    t1, t2 = resolvent_traces_batch(chain.c[None, :], chain.cp[None, :])
    return float(t1[0]), float(t2[0])


def jacobi_logdensity_unnormalized(x, params: EnsembleParams) -> float:
    """Log of the unnormalized q-point eigenvalue density at lambda scale.

    sum_i [ (n-p-q-1)/2 * log(1-x_i) + (p-q-1)/2 * log(x_i) ]
      + sum_{i < j} log |x_i - x_j|

    Each unordered pair enters the interaction once (the linear repulsion
    of a real, orthogonal-invariant ensemble); squaring it would describe
    a different ensemble and is inconsistent with the sampled law, whose
    mean trace pq/n this density reproduces under quadrature.

    Coincident coordinates are out of support and return -inf.
    """
    params.require_density()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != params.q:
        raise ValueError(f"expected {params.q} coordinates")
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise ValueError("coordinates must lie strictly in (0, 1)")
    n, p, q = params.n, params.p, params.q
    val = float(np.sum((n - p - q - 1) / 2.0 * np.log1p(-x)
                       + (p - q - 1) / 2.0 * np.log(x)))
    for i in range(q):
        for j in range(i + 1, q):
            diff = abs(x[i] - x[j])
            if diff == 0.0:
                return -math.inf
            val += math.log(diff)
    return val
