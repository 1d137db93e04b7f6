import math

import numpy as np
import pytest

from eigenfree import models as M
from eigenfree import range_avoidance as RA
from eigenfree.errors import (HitsEigenvalue, OutsideSpectrum, PickExhausted)

SEG = M.make_model("segment")
SQ = M.make_model("unit_square")


def test_weighted_vector_basics():
    v = RA.WeightedVector.from_entries([3, 1, 2], [1j, 2.0, 0.5])
    assert list(v.indices) == [1, 2, 3]
    assert v.get(3) == 1j and v.get(7) == 0.0
    assert v.norm_sq == pytest.approx(4 + 0.25 + 1)
    idx, vals = v.prefix(2)
    assert list(idx) == [1, 2]
    with pytest.raises(ValueError):
        RA.WeightedVector.from_entries([1, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        RA.WeightedVector.from_entries([1, 2], [1.0, 0.0])


def test_selection_square_examples():
    plan = RA.build_selection(SQ, 1, 1000)
    assert plan.beta(0) == 1 and plan.beta(1) == 4
    # picks land in their open squares and are pairwise disjoint
    lam = M.lambda_block(SQ, 1000)
    rec = plan.stages[1]
    for l, m, i in zip(rec.square_ls, rec.square_ms, rec.i_picks):
        z = lam[i - 1]
        assert l / 2 < z.real < (l + 1) / 2
        assert m / 2 < z.imag < (m + 1) / 2
    picked = np.concatenate([r.i_picks for r in plan.stages]
                            + [[r.j_pick] for r in plan.stages])
    assert len(np.unique(picked)) == len(picked)
    # lambda_{j(n)} lies inside O_n
    for r in plan.stages:
        assert abs(lam[r.j_pick - 1] - r.ball.center) < r.ball.radius


def test_selection_measure_zero_has_no_square_picks():
    plan = RA.build_selection(SEG, 6, 500)
    assert all(plan.beta(n) == 0 for n in range(7))
    assert all(len(r.i_picks) == 0 for r in plan.stages)


def test_selection_exhaustion():
    with pytest.raises(PickExhausted):
        RA.build_selection(SQ, 1, 1)


def test_assemble_u_weights_and_support():
    plan = RA.build_selection(SQ, 1, 1000)
    u = RA.assemble_u(plan)
    lam_w = RA.stage_weight(1, 4)
    assert lam_w == pytest.approx(1 / 6)
    for i in plan.stages[1].i_picks:
        assert u.get(int(i)) == pytest.approx(lam_w)
    for rec in plan.stages:
        assert u.get(rec.j_pick) == pytest.approx(2 * rec.ball.radius)
    for i in plan.leftover[:10]:
        assert u.get(int(i)) == pytest.approx(1 / (i + 1))
    # every index below the horizon has a nonzero entry
    assert np.array_equal(u.indices, np.arange(1, 1001))
    assert np.all(u.values != 0)


def test_component_norms_orthogonal_split(segment_bundle):
    plan, u = segment_bundle.plan, segment_bundle.u
    n1, n2, nr = RA.component_norms_sq(plan, u)
    assert n1 == 0.0  # measure-zero model has no square picks
    assert n2 <= M.cover_budget(SEG)
    assert abs(u.norm_sq - (n1 + n2 + nr)) <= 1e-12 * u.norm_sq


def test_resolvent_energy_single_entry():
    u = RA.WeightedVector.from_entries([1], [1.0])
    s = RA.resolvent_energy(u, SEG, 2 + 0j, 1)
    lam1 = M.lambda_point(SEG, 1)
    assert s == pytest.approx(1.0 / abs(2 - lam1) ** 2)


def test_resolvent_energy_monotone_and_bound():
    plan = RA.build_selection(SEG, 30, 512)
    u = RA.assemble_u(plan)
    z = 1.7 + 0.4j
    prev = 0.0
    for upto in (1, 8, 64, 256, 512):
        s = RA.resolvent_energy(u, SEG, z, upto)
        assert s >= prev
        prev = s
    d = M.distance(SEG, z)
    assert prev <= u.norm_sq / d ** 2 * (1 + 1e-12)


def test_resolvent_energy_hits_eigenvalue():
    u = RA.WeightedVector.from_entries([1, 2, 5], [1.0, 1.0, 1.0])
    z = M.lambda_point(SEG, 5)
    with pytest.raises(HitsEigenvalue) as exc:
        RA.resolvent_energy(u, SEG, z, 8)
    assert exc.value.index == 5


def test_divergence_outside_raises(segment_bundle):
    with pytest.raises(OutsideSpectrum):
        RA.divergence_diagnostic(segment_bundle.plan, segment_bundle.u,
                                 2 + 2j)


def test_divergence_exceptional_segment(segment_bundle):
    rep = RA.divergence_diagnostic(segment_bundle.plan, segment_bundle.u,
                                   complex(1 / 3, 0),
                                   stages=list(range(1, 21)))
    assert rep.kind == "exceptional"
    assert rep.unit_total >= 18
    assert rep.covered_stages == 20
    assert rep.per_ball_ok
    rows = list(rep.to_csv_rows())
    assert len(rows) == 20


def test_divergence_density_square(square_plan_u):
    plan, u = square_plan_u
    z = complex((math.sqrt(5) * 11) % 1.0, (math.sqrt(7) * 11) % 1.0)
    rep = RA.divergence_diagnostic(plan, u, z, stages=list(range(4, 10)))
    assert rep.kind == "density_one"
    assert rep.fit.slope_positive_95
    # envelope is nondecreasing and sits under the raw values
    assert all(e <= v for e, v in zip(rep.envelope, rep.values))
    assert all(rep.envelope[i] <= rep.envelope[i + 1]
               for i in range(len(rep.envelope) - 1))
    # stage sums clear the reference growth line
    assert all(v >= lb for v, lb in zip(rep.values, rep.lower_bound))


def test_summability_diagnostic():
    n = 10_000
    idx = np.arange(1, n + 1)
    u = RA.WeightedVector.from_entries(idx, 1.0 / (idx + 1.0))
    s2 = RA.summability_diagnostic(u, 2.0, 1000)
    assert s2 == pytest.approx(sum(1 / (i + 1) ** 2
                                   for i in range(1, 1001)))
    # p = 1 keeps growing; p = 1.5 flattens out
    s1_half = RA.summability_diagnostic(u, 1.0, n // 2)
    s1 = RA.summability_diagnostic(u, 1.0, n)
    assert s1 - s1_half > 0.5  # harmonic-like growth continues
    s15_half = RA.summability_diagnostic(u, 1.5, n // 2)
    s15 = RA.summability_diagnostic(u, 1.5, n)
    assert (s15 - s15_half) / s15 < 0.01


def test_plan_serialization_roundtrip():
    from eigenfree.artifacts import plan_from_dict, plan_to_dict
    plan = RA.build_selection(SQ, 2, 2000)
    d = plan_to_dict(plan)
    back = plan_from_dict(d)
    assert back.max_stage == plan.max_stage
    assert back.horizon == plan.horizon
    assert np.array_equal(back.leftover, plan.leftover)
    for a, b in zip(back.stages, plan.stages):
        assert a.j_pick == b.j_pick
        assert np.array_equal(a.i_picks, b.i_picks)
        assert a.ball == b.ball
