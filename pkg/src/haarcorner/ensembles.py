"""Gaussian blocks, Haar-orthogonal corner blocks, and their spectra.

A "matrix sample" is a plain (p, q) float64 ndarray.  Corner blocks are
drawn by Stewart's method: orthonormalize an n x q standard Gaussian
matrix by QR, force the diagonal of the triangular factor positive (which
makes the frame uniform on the Stiefel manifold), and keep the first p
rows.  Only the n x q frame is ever materialized, so the cost is O(n q^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import EnsembleParams

# Open-interval guard for spectra of corner blocks: eigenvalues of Z'Z in
# [1 - BOUNDARY_TOL, 1) are a rounding artifact of an event of probability
# zero and are flagged, never clamped.
BOUNDARY_TOL = 1e-12

_diagnostics = {"qr_resamples": 0}


def qr_resample_count() -> int:
    """Number of rank-deficient Gaussian draws that were redrawn."""
    return _diagnostics["qr_resamples"]


@dataclass(frozen=True)
class Spectrum:
    """Ascending squared singular values, at one of two scales.

    ``scale == "lambda"`` stores eigenvalues of Z'Z (each in (0, 1) for
    corner blocks); ``scale == "x"`` stores n * lambda, the eigenvalues of
    the rescaled Gram matrix.
    """

    values: np.ndarray
    scale: str = "lambda"

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("spectrum must be a non-empty 1-d array")
        if self.scale not in ("lambda", "x"):
            raise ValueError(f"unknown scale {self.scale!r}")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("spectrum values must be ascending")

    def to_lambda(self, n: int) -> "Spectrum":
        if self.scale == "lambda":
            return self
        return Spectrum(self.values / n, "lambda")

    def to_x(self, n: int) -> "Spectrum":
        if self.scale == "x":
            return self
        return Spectrum(self.values * n, "x")


def exceeds_unit_boundary(values: np.ndarray, tol: float = BOUNDARY_TOL) -> bool:
    """True when any lambda-scale value touches [1 - tol, infinity)."""
    return bool(np.any(values >= 1.0 - tol))


def sample_gaussian_matrix(params: EnsembleParams,
                           rng: np.random.Generator) -> np.ndarray:
    """p x q matrix of independent standard normal entries."""
    return rng.standard_normal((params.p, params.q))


def gaussian_batch(params: EnsembleParams, rng: np.random.Generator,
                   count: int) -> np.ndarray:
    return rng.standard_normal((count, params.p, params.q))


def corner_batch(params: EnsembleParams, rng: np.random.Generator,
                 count: int) -> np.ndarray:
    """(count, p, q) stack of corner blocks of Haar orthogonal matrices."""
    n, p, q = params.n, params.p, params.q
    g = rng.standard_normal((count, n, q))
    qf, r = np.linalg.qr(g)
    diag = np.einsum("bii->bi", r)
    bad = np.any(diag == 0.0, axis=1)
    while np.any(bad):  # rank-deficient draw: probability zero
        _diagnostics["qr_resamples"] += int(bad.sum())
        g[bad] = rng.standard_normal((int(bad.sum()), n, q))
        qf, r = np.linalg.qr(g)
        diag = np.einsum("bii->bi", r)
        bad = np.any(diag == 0.0, axis=1)
    qf = qf * np.sign(diag)[:, None, :]
    return qf[:, :p, :]


def sample_corner_submatrix(params: EnsembleParams,
                            rng: np.random.Generator) -> np.ndarray:
    """One p x q corner block of a Haar orthogonal n x n matrix."""
    return corner_batch(params, rng, 1)[0]


def spectrum_batch(z: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of Z'Z for a (count, p, q) stack, via SVD of Z."""
    s = np.linalg.svd(z, compute_uv=False)
    return np.sort(s * s, axis=-1)


def squared_singular_spectrum(z: np.ndarray) -> Spectrum:
    """Ascending eigenvalues of Z'Z, computed from singular values of Z.

    Requires p >= q.  Working on Z itself instead of the formed Gram matrix
    avoids squaring the condition number.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if z.shape[0] < z.shape[1]:
        raise ValueError("expected p >= q (tall or square matrix)")
    s = np.linalg.svd(z, compute_uv=False)
    return Spectrum(np.sort(s * s), "lambda")
