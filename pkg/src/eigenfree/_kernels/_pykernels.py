"""Pure NumPy fallback kernels.

Vectorized over the evaluation points, looping over terms, so every point
sees the same operation sequence as the per-point loops in _compiled.pyx.
Keep the arithmetic in lockstep with that file: the two backends are
expected to agree bit for bit.
"""

import numpy as np


def pf_eval(lam, coef, zs):
    """For each z: 1 - sum_i coef[i] / (z - lam[i]), compensated."""
    zr = zs.real.astype(np.float64, copy=True)
    zi = zs.imag.astype(np.float64, copy=True)
    sr = np.zeros_like(zr)
    si = np.zeros_like(zr)
    cr = np.zeros_like(zr)
    ci = np.zeros_like(zr)
    for i in range(len(lam)):
        dr = zr - lam[i].real
        di = zi - lam[i].imag
        den = dr * dr + di * di
        tr = (coef[i].real * dr + coef[i].imag * di) / den
        ti = (coef[i].imag * dr - coef[i].real * di) / den
        y = tr - cr
        t = sr + y
        cr = (t - sr) - y
        sr = t
        y = ti - ci
        t = si + y
        ci = (t - si) - y
        si = t
    out = np.empty(len(zs), dtype=np.complex128)
    out.real = 1.0 - sr
    out.imag = -si
    return out


def prod_eval(lam, mus, zs):
    """For each z: prod_i (z - mus[i]) / (z - lam[i]), factors in order."""
    zr = zs.real.astype(np.float64, copy=True)
    zi = zs.imag.astype(np.float64, copy=True)
    ar = np.ones_like(zr)
    ai = np.zeros_like(zr)
    for i in range(len(lam)):
        nr = zr - mus[i].real
        ni = zi - mus[i].imag
        dr = zr - lam[i].real
        di = zi - lam[i].imag
        den = dr * dr + di * di
        fr = (nr * dr + ni * di) / den
        fi = (ni * dr - nr * di) / den
        t = ar * fr - ai * fi
        ai = ar * fi + ai * fr
        ar = t
    out = np.empty(len(zs), dtype=np.complex128)
    out.real = ar
    out.imag = ai
    return out


def resolvent_sum(w2, lam, zs):
    """For each z: sum_i w2[i] / |z - lam[i]|^2, compensated."""
    zr = zs.real.astype(np.float64, copy=True)
    zi = zs.imag.astype(np.float64, copy=True)
    s = np.zeros_like(zr)
    c = np.zeros_like(zr)
    for i in range(len(lam)):
        dr = zr - lam[i].real
        di = zi - lam[i].imag
        term = w2[i] / (dr * dr + di * di)
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
    return s
