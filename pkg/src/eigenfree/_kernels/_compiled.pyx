# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels.

Complex arithmetic is spelled out over real doubles in a fixed order
(division as multiply-by-conjugate over the squared modulus, Kahan
compensation on each accumulator component).  The pure Python backend
implements the exact same operation sequence, so both backends agree
bit for bit; keep the two files in sync when touching either.
"""

import numpy as np


def pf_eval(const double complex[::1] lam,
            const double complex[::1] coef,
            const double complex[::1] zs):
    """For each z: 1 - sum_i coef[i] / (z - lam[i]), compensated."""
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t m = zs.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double zr, zi, dr, di, den, tr, ti
    cdef double sr, si, cr, ci, y, t
    with nogil:
        for j in range(m):
            zr = zs[j].real
            zi = zs[j].imag
            sr = 0.0
            si = 0.0
            cr = 0.0
            ci = 0.0
            for i in range(n):
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
            ov[j].real = 1.0 - sr
            ov[j].imag = -si
    return out


def prod_eval(const double complex[::1] lam,
              const double complex[::1] mus,
              const double complex[::1] zs):
    """For each z: prod_i (z - mus[i]) / (z - lam[i]), factors in order."""
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t m = zs.shape[0]
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double zr, zi, nr, ni, dr, di, den, fr, fi, ar, ai, t
    with nogil:
        for j in range(m):
            zr = zs[j].real
            zi = zs[j].imag
            ar = 1.0
            ai = 0.0
            for i in range(n):
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
            ov[j].real = ar
            ov[j].imag = ai
    return out


def resolvent_sum(const double[::1] w2,
                  const double complex[::1] lam,
                  const double complex[::1] zs):
    """For each z: sum_i w2[i] / |z - lam[i]|^2, compensated."""
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t m = zs.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double zr, zi, dr, di, term, s, c, y, t
    with nogil:
        for j in range(m):
            zr = zs[j].real
            zi = zs[j].imag
            s = 0.0
            c = 0.0
            for i in range(n):
                dr = zr - lam[i].real
                di = zi - lam[i].imag
                term = w2[i] / (dr * dr + di * di)
                y = term - c
                t = s + y
                c = (t - s) - y
                s = t
            ov[j] = s
    return out
