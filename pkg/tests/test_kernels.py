"""Kernel backends: agreement with each other and with a naive oracle."""

import math

import numpy as np
import pytest

from eigenfree import _kernels as K
from eigenfree._kernels import _pykernels


def _workload(n=300, m=50, seed=9):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0, 1, n) + 1j * rng.uniform(0, 1, n)
    coef = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 1e-3
    mus = lam + 1e-4 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    zs = rng.uniform(-1, 2, m) + 1j * rng.uniform(1.1, 2.0, m)
    return lam, coef, mus, zs


def test_backends_agree_bitwise():
    compiled = pytest.importorskip("eigenfree._kernels._compiled")
    lam, coef, mus, zs = _workload()
    w2 = np.abs(coef)
    assert np.array_equal(compiled.pf_eval(lam, coef, zs),
                          _pykernels.pf_eval(lam, coef, zs))
    assert np.array_equal(compiled.prod_eval(lam, mus, zs),
                          _pykernels.prod_eval(lam, mus, zs))
    assert np.array_equal(compiled.resolvent_sum(w2, lam, zs),
                          _pykernels.resolvent_sum(w2, lam, zs))


def test_pf_eval_against_fsum_oracle():
    lam, coef, _, zs = _workload(n=120, m=20)
    got = K.pf_eval(lam, coef, zs)
    for z, g in zip(zs, got):
        terms = [coef[i] / (z - lam[i]) for i in range(len(lam))]
        expect = 1.0 - complex(math.fsum(t.real for t in terms),
                               math.fsum(t.imag for t in terms))
        assert abs(g - expect) <= 1e-14 * (1 + abs(expect))


def test_prod_eval_against_logspace_oracle():
    lam, _, mus, zs = _workload(n=80, m=10)
    got = K.prod_eval(lam, mus, zs)
    for z, g in zip(zs, got):
        acc = 1.0 + 0.0j
        for i in range(len(lam)):
            acc *= (z - mus[i]) / (z - lam[i])
        assert abs(g - acc) <= 1e-12 * (1 + abs(acc))


def test_resolvent_sum_oracle():
    lam, coef, _, zs = _workload(n=64, m=8)
    w2 = np.abs(coef) ** 2
    got = K.resolvent_sum(w2, lam, zs)
    for z, g in zip(zs, got):
        expect = math.fsum(w2[i] / abs(z - lam[i]) ** 2
                           for i in range(len(lam)))
        assert g == pytest.approx(expect, rel=1e-13)


def test_kahan_beats_cancellation():
    # alternating large terms: compensated summation keeps the tiny result
    lam = np.array([0.0 + 1e-8j, 0.0 - 1e-8j] * 500)
    coef = np.ones(1000, dtype=complex) * 1e-6
    z = np.array([1.0 + 0.0j])
    out = K.pf_eval(lam, coef, z)[0]
    terms = [coef[i] / (1.0 - lam[i]) for i in range(1000)]
    expect = 1.0 - complex(math.fsum(t.real for t in terms),
                           math.fsum(t.imag for t in terms))
    assert abs(out - expect) <= 1e-15 * abs(expect)


def test_empty_inputs():
    empty = np.empty(0, dtype=complex)
    zs = np.array([1 + 1j, 2 + 0j])
    assert np.all(K.pf_eval(empty, empty, zs) == 1.0)
    assert np.all(K.prod_eval(empty, empty, zs) == 1.0)
    assert np.all(K.resolvent_sum(np.empty(0), empty, zs) == 0.0)
