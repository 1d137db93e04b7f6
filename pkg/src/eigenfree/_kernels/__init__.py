"""Evaluation kernels with a compiled fast path.

The compiled extension is preferred when importable; setting the
environment variable EIGENFREE_PURE=1 forces the pure NumPy backend.
Both backends implement identical arithmetic (see module docstrings),
so results do not depend on which one is active.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("EIGENFREE_PURE") == "1":
    _impl = _pykernels
    USING_COMPILED = False
else:
    try:
        from . import _compiled as _impl
        USING_COMPILED = True
    except ImportError:
        _impl = _pykernels
        USING_COMPILED = False

BACKEND = "compiled" if USING_COMPILED else "pure"


def _c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def pf_eval(lam, coef, zs):
    """1 - sum_i coef[i]/(z - lam[i]) for each z (compensated summation)."""
    return _impl.pf_eval(_c128(lam), _c128(coef), _c128(zs))


def prod_eval(lam, mus, zs):
    """prod_i (z - mus[i])/(z - lam[i]) for each z, factors in index order."""
    return _impl.prod_eval(_c128(lam), _c128(mus), _c128(zs))


def resolvent_sum(w2, lam, zs):
    """sum_i w2[i]/|z - lam[i]|^2 for each z (compensated summation)."""
    return _impl.resolvent_sum(_f64(w2), _c128(lam), _c128(zs))
