import math

import numpy as np
import pytest

from eigenfree import models as M
from eigenfree import nonvanishing as NV
from eigenfree.errors import DegenerateLambda, PoleHit, SearchFailed
from eigenfree.verification import (coeffwise_rel_err, poly_from_roots,
                                    sample_nodes, secular_poly)

SEG = M.make_model("segment")


@pytest.fixture(scope="module")
def table64():
    return NV.build_table(SEG, M.lambda_block(SEG, 64), "quadratic",
                          "quadratic")


# ---------------------------------------------------------------------------
# coefficient formulas


def test_single_pole_coefficient():
    lam = np.array([0.5 + 0j])
    mu = np.array([0.3 + 0j])
    c = NV.coefficient_block(lam, mu, 1, np.array([1]))
    assert c[0] == pytest.approx(mu[0] - lam[0])  # mu_1 - lam_1


def test_two_pole_example():
    lam = np.array([0 + 0j, 1 + 0j])
    mu = np.array([0.1 + 0j, 0.9 + 0j])
    c = NV.coefficient_block(lam, mu, 2, np.array([1, 2]))
    assert c[0] == pytest.approx(0.09)
    assert c[1] == pytest.approx(-0.09)
    assert NV.eval_sum(lam, c, 2 + 0j, 2) == pytest.approx(1.045)
    assert NV.eval_product(lam, mu, 2 + 0j, 2) == pytest.approx(1.045)


def test_trace_identity(table64):
    rng = np.random.default_rng(3)
    for n in (2, 5, 9):
        pts = sample_nodes(rng, 2 * n, 1e-3)
        lam, mu = pts[:n], pts[n:]
        c = NV.coefficient_block(lam, mu, n, np.arange(1, n + 1))
        assert c.sum() == pytest.approx((mu - lam).sum(), abs=1e-12)
    # holds on constructed tables as well
    assert table64.c_limit.sum() == pytest.approx(
        (table64.mus - table64.lambdas).sum(), abs=1e-12)


def test_secular_expansion_matches_nodes():
    rng = np.random.default_rng(4)
    for n in (1, 2, 3, 4):
        pts = sample_nodes(rng, 2 * n, 1e-2)
        lam, mu = pts[:n], pts[n:]
        c = NV.coefficient_block(lam, mu, n, np.arange(1, n + 1))
        assert coeffwise_rel_err(secular_poly(lam, c),
                                 poly_from_roots(mu)) < 1e-12


def test_degenerate_lambda():
    lam = np.array([0.5 + 0j, 0.5 + 0j])
    with pytest.raises(DegenerateLambda):
        NV.new_table(SEG, lam, NV.EpsSchedule.make("quadratic", 2),
                     NV.GammaSchedule.make("quadratic", 2))


# ---------------------------------------------------------------------------
# evaluation


def test_eval_empty_product_is_one():
    lam = np.empty(0, dtype=complex)
    assert NV.eval_product(lam, lam, 1 + 2j, 0) == 1.0
    assert NV.eval_sum(lam, lam, 1 + 2j, 0) == 1.0


def test_eval_zero_at_node_and_pole_error():
    lam = np.array([0 + 0j, 1 + 0j])
    mu = np.array([0.1 + 0j, 0.9 + 0j])
    assert NV.eval_product(lam, mu, 0.1 + 0j, 2) == 0.0
    with pytest.raises(PoleHit) as exc:
        NV.eval_product(lam, mu, 1 + 0j, 2)
    assert exc.value.index == 2


def test_zero_coefficients_give_one():
    lam = np.array([0 + 0j, 1 + 0j])
    c = np.zeros(2, dtype=complex)
    for z in (2 + 0j, -1j, 0.5 + 3j):
        assert NV.eval_sum(lam, c, z, 2) == 1.0


def test_product_sum_identity_random(table64):
    rng = np.random.default_rng(12)
    zs = rng.uniform(-1, 2, 200) + 1j * rng.uniform(0.05, 2, 200)
    p = NV.eval_product_grid(table64.lambdas, table64.mus, zs, 64)
    s = NV.eval_sum_grid(table64.lambdas, table64.c_limit, zs, 64)
    assert np.max(np.abs(p - s) / (1 + np.abs(p))) < 1e-10


# ---------------------------------------------------------------------------
# schedules and node choice


def test_eps_schedule_tails():
    eps = NV.EpsSchedule.make("quadratic", 50)
    # tails[k] * prod_{i<=k}(1+eps_i) equals the full product
    total = math.sinh(math.pi) / (2 * math.pi)
    partial = np.prod(1 + eps.values[:10])
    assert eps.tails[10] * partial == pytest.approx(total, rel=1e-12)
    dy = NV.EpsSchedule.make("dyadic", 50)
    expect = np.prod([1 + 2.0 ** -i for i in range(11, 80)])
    assert dy.tails[10] == pytest.approx(expect, rel=1e-12)


def test_gamma_tails():
    g = NV.GammaSchedule.make("quadratic", 100)
    brute = sum(1.0 / (i + 1) ** 2 for i in range(11, 200_000))
    assert g.tail(10) == pytest.approx(brute, rel=1e-4)
    gd = NV.GammaSchedule.make("dyadic", 100)
    assert gd.tail(10) == pytest.approx(2.0 ** -10)
    drv = NV.GammaSchedule.make("driven", 4,
                                driven_values=np.array([1., 2., 3., 4.]),
                                driven_beyond=0.5)
    assert drv.tail(2) == pytest.approx(7.5)


def test_choose_mu_constraints(table64):
    lam = table64.lambdas
    for k in (1, 5, 40, 64):
        mu = table64.mus[k - 1]
        assert M.distance(SEG, complex(mu)) <= 1e-12
        assert mu not in set(map(complex, lam))
        if k > 1:
            gap = np.min(np.abs(lam[:k - 1] - lam[k - 1]))
            assert abs(lam[k - 1] - mu) <= table64.eps.values[k - 1] * gap
        head = abs(table64.heads[k - 1])
        assert head <= table64.gamma.values[k - 1] / table64.tails_at(k)


def test_choose_mu_budget_zero_fails():
    lam = M.lambda_block(SEG, 4)
    table = NV.new_table(SEG, lam, NV.EpsSchedule.make("quadratic", 4),
                         NV.GammaSchedule.make("quadratic", 4))
    with pytest.raises(SearchFailed):
        NV.choose_mu(SEG, lam, 1, table, probe_budget=0)


def test_coefficient_bounds_and_nonzero(table64):
    assert table64.bound_ok
    assert np.all(np.abs(table64.c_limit) <= table64.gamma.values)
    assert np.all(np.abs(table64.c_limit) > 0)


def test_build_table_other_models():
    for kind in ("unit_circle", "cantor"):
        model = M.make_model(kind)
        t = NV.build_table(model, M.lambda_block(model, 32))
        assert np.all(np.abs(t.c_limit) <= t.gamma.values)
        assert max(M.distance(model, complex(m)) for m in t.mus) <= 1e-12


# ---------------------------------------------------------------------------
# tail bounds and certificates


def test_tail_bound_scaling(table64):
    b1 = NV.tail_bound(table64, 32, 1.0)
    b2 = NV.tail_bound(table64, 32, 2.0)
    assert b1 == pytest.approx(2 * b2)
    # at the horizon only the gamma tail remains
    bh = NV.tail_bound(table64, 64, 1.0)
    assert bh == pytest.approx(table64.gamma.tail(64))


def test_tail_bound_geometric_example():
    lam = M.lambda_block(SEG, 20)
    t = NV.build_table(SEG, lam, "quadratic", "dyadic")
    bound = NV.tail_bound(t, 10, 1.0)
    assert bound <= t.diff_sum(10) + 2.0 ** -10 + 1e-15


def test_convergence_under_tail_bound(table64):
    theta = 2 * math.pi * np.arange(64) / 64
    grid = 0.5 + 1.25 * np.exp(1j * theta)
    dist = min(M.distance(SEG, complex(z)) for z in grid)
    for h in (8, 16, 32):
        f_h = NV.eval_product_grid(table64.lambdas, table64.mus, grid, h)
        f_2h = NV.eval_product_grid(table64.lambdas, table64.mus, grid, 2 * h)
        assert np.max(np.abs(f_2h - f_h)) <= NV.tail_bound(table64, h, dist)


def test_certificate(table64):
    theta = 2 * math.pi * np.arange(60) / 60
    report = NV.nonvanishing_certificate(table64,
                                         0.5 + 1.5 * np.exp(1j * theta))
    assert report.passed
    assert report.min_factor_abs > 0
    rows = list(report.to_csv_rows())
    assert len(rows) == 60 and all(r[4] > 0 for r in rows)


def test_certificate_fails_near_set(table64):
    # a point nearly touching the set gets a huge tail bound
    report = NV.nonvanishing_certificate(table64,
                                         np.array([0.5 + 1e-9j]))
    assert not report.passed
    with pytest.raises(ValueError):
        NV.nonvanishing_certificate(table64, np.array([0.5 + 0j]))


def test_certificate_zero_coefficients():
    lam = M.lambda_block(SEG, 8)
    t = NV.build_table(SEG, lam)
    t2 = NV.CoefficientTable(
        model=SEG, lambdas=t.lambdas, eps=t.eps, gamma=t.gamma, mus=t.mus,
        heads=t.heads, c_limit=np.zeros(8, dtype=complex), filled=8)
    zs = np.array([2 + 2j, -1 - 1j])
    vals = NV.eval_sum_grid(t2.lambdas, t2.c_limit, zs, 8)
    assert np.all(vals == 1.0)
