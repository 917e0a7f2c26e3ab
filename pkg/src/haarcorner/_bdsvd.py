"""Singular values of bidiagonal matrices by implicit QR iteration.

Demmel-Kahan zero-shift sweeps preserve high relative accuracy of the
small singular values; Wilkinson-style shifted sweeps (shift taken from
the trailing 2 x 2 block, as in the reference QR driver) give fast
convergence for clustered O(1) values.  Deflation uses the forward
recurrence lower bound on the smallest singular value, so entries are
dropped only when negligible relative to every singular value.

Cost is O(m) per sweep; matrices never leave the two bands, and the Gram
tridiagonal is never formed.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

EPS = float(np.finfo(np.float64).eps)
_TOL = 100.0 * EPS


@njit(cache=True)
def _rot(f, g):
    """Givens pair (c, s, r) with c*f + s*g = r and -s*f + c*g = 0."""
    if g == 0.0:
        return 1.0, 0.0, f
    if f == 0.0:
        return 0.0, 1.0, g
    r = math.hypot(f, g)
    return f / r, g / r, r


@njit(cache=True)
def _sv_2x2(f, g, h):
    """(smin, smax) of [[f, g], [0, h]] without squaring (dlas2 scheme)."""
    fa, ga, ha = abs(f), abs(g), abs(h)
    fhmn = min(fa, ha)
    fhmx = max(fa, ha)
    if fhmn == 0.0:
        if fhmx == 0.0:
            return 0.0, ga
        rt = min(fhmx, ga) / max(fhmx, ga)
        return 0.0, max(fhmx, ga) * math.sqrt(1.0 + rt * rt)
    if ga < fhmx:
        a_s = 1.0 + fhmn / fhmx
        a_t = (fhmx - fhmn) / fhmx
        a_u = (ga / fhmx) ** 2
        c = 2.0 / (math.sqrt(a_s * a_s + a_u) + math.sqrt(a_t * a_t + a_u))
        return fhmn * c, fhmx / c
    a_u = fhmx / ga
    if a_u == 0.0:
        return (fhmn * fhmx) / ga, ga
    a_s = 1.0 + fhmn / fhmx
    a_t = (fhmx - fhmn) / fhmx
    c = 1.0 / (math.sqrt(1.0 + (a_s * a_u) ** 2)
               + math.sqrt(1.0 + (a_t * a_u) ** 2))
    return 2.0 * ((fhmn * c) * a_u), ga / (c + c)


@njit(cache=True)
def _sweep_zero(d, e, lo, hi):
    """One implicit zero-shift QR sweep on the block [lo, hi]."""
    oldcs = 1.0
    oldsn = 0.0
    f = d[lo]
    g = e[lo]
    for i in range(lo, hi):
        cs, sn, r = _rot(f, g)
        if i != lo:
            e[i - 1] = oldsn * r
        f = oldcs * r
        g = d[i + 1] * sn
        h = d[i + 1] * cs
        oldcs, oldsn, r = _rot(f, g)
        d[i] = r
        f = h
        if i != hi - 1:
            g = e[i + 1]
    e[hi - 1] = f * oldsn
    d[hi] = f * oldcs


@njit(cache=True)
def _sweep_shift(d, e, lo, hi, shift):
    """One implicit shifted QR sweep (bulge chase) on the block [lo, hi]."""
    f = (abs(d[lo]) - shift) * (math.copysign(1.0, d[lo]) + shift / d[lo])
    g = e[lo]
    for k in range(lo, hi):
        cs, sn, r = _rot(f, g)
        if k != lo:
            e[k - 1] = r
        f = cs * d[k] + sn * e[k]
        e[k] = cs * e[k] - sn * d[k]
        g = sn * d[k + 1]
        d[k + 1] = cs * d[k + 1]
        cs, sn, r = _rot(f, g)
        d[k] = r
        f = cs * e[k] + sn * d[k + 1]
        d[k + 1] = cs * d[k + 1] - sn * e[k]
        if k != hi - 1:
            g = sn * e[k + 1]
            e[k + 1] = cs * e[k + 1]
    e[hi - 1] = f


@njit(cache=True)
def _bdsvd_inplace(d, e, tol, maxiter):
    """Reduce the bands to singular values in d; 0 on success, 1 on cap."""
    m = d.size
    for i in range(m):
        d[i] = abs(d[i])
    for i in range(m - 1):
        e[i] = abs(e[i])
    hi = m - 1
    it = 0
    while hi > 0:
        # drop superdiagonal entries that are negligible relative to the
        # running lower bound on the smallest singular value; shifted
        # sweeps may leave negative entries, so criteria use magnitudes
        mu = abs(d[0])
        for j in range(hi):
            ae = abs(e[j])
            if ae <= tol * mu:
                e[j] = 0.0
                mu = abs(d[j + 1])
            else:
                mu = abs(d[j + 1]) * (mu / (mu + ae))
        while hi > 0 and e[hi - 1] == 0.0:
            hi -= 1
        if hi == 0:
            break
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0.0:
            lo -= 1
        if hi - lo == 1:
            ssmin, ssmax = _sv_2x2(d[lo], e[lo], d[hi])
            d[lo] = ssmax
            d[hi] = ssmin
            e[lo] = 0.0
            continue
        it += 1
        if it > maxiter:
            return 1
        smax = 0.0
        for j in range(lo, hi + 1):
            if abs(d[j]) > smax:
                smax = abs(d[j])
        for j in range(lo, hi):
            if abs(e[j]) > smax:
                smax = abs(e[j])
        sminl = abs(d[lo])
        for j in range(lo, hi):
            sminl = abs(d[j + 1]) * (sminl / (sminl + abs(e[j])))
        if sminl <= math.sqrt(EPS) * smax or smax == 0.0:
            # relative accuracy of a tiny singular value is at stake
            for j in range(lo, hi + 1):
                d[j] = abs(d[j])
            for j in range(lo, hi):
                e[j] = abs(e[j])
            _sweep_zero(d, e, lo, hi)
        else:
            shift, _ = _sv_2x2(d[hi - 1], e[hi - 1], d[hi])
            if shift > 0.0 and (sminl / shift) ** 2 < EPS:
                shift = 0.0
            if shift == 0.0 or shift * shift <= EPS * (smax * smax):
                for j in range(lo, hi + 1):
                    d[j] = abs(d[j])
                for j in range(lo, hi):
                    e[j] = abs(e[j])
                _sweep_zero(d, e, lo, hi)
            else:
                _sweep_shift(d, e, lo, hi, shift)
    for i in range(m):
        d[i] = abs(d[i])
    return 0


@njit(cache=True)
def _spectra_from_bands(diags, offdiags):
    """Row-wise ascending 1 - sigma^2 for stacked bidiagonal bands."""
    b, q = diags.shape
    out = np.empty((b, q))
    status = 0
    for k in range(b):
        d = diags[k].copy()
        e = offdiags[k].copy()
        if q > 1:
            status |= _bdsvd_inplace(d, e, _TOL, 6 * q * q)
        else:
            d[0] = abs(d[0])
        out[k] = np.sort(1.0 - d * d)
    return out, status


def bidiagonal_singular_values(diag: np.ndarray, offdiag: np.ndarray) -> np.ndarray:
    """Ascending singular values of a bidiagonal matrix.

    ``diag`` has length m, ``offdiag`` length m - 1.  Upper and lower
    bidiagonal matrices share singular values with their transpose, so the
    off-diagonal may come from either side.
    """
    d = np.ascontiguousarray(diag, dtype=np.float64).copy()
    e = np.ascontiguousarray(offdiag, dtype=np.float64).copy()
    if d.ndim != 1 or e.shape != (d.size - 1,):
        raise ValueError("need diag of length m and offdiag of length m - 1")
    if d.size == 1:
        return np.abs(d)
    status = _bdsvd_inplace(d, e, _TOL, 6 * d.size * d.size)
    if status != 0:  # iteration cap: fall back to dense LAPACK
        mat = np.diag(np.ascontiguousarray(diag, dtype=np.float64))
        mat += np.diag(np.ascontiguousarray(offdiag, dtype=np.float64), 1)
        return np.sort(np.linalg.svd(mat, compute_uv=False))
    return np.sort(d)
