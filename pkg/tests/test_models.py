import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenfree import models as M
from eigenfree.errors import DuplicateEigenvalue

ALL_KINDS = ["segment", "unit_square", "unit_circle", "cantor"]


@pytest.fixture(params=ALL_KINDS)
def model(request):
    return M.make_model(request.param)


def test_enumeration_pins():
    seg = M.make_model("segment")
    sq = M.make_model("unit_square")
    phi = (1 + math.sqrt(5)) / 2
    assert M.lambda_point(seg, 1) == complex(phi % 1.0, 0.0)
    z = M.lambda_point(sq, 1)
    assert z.real == pytest.approx(math.sqrt(2) - 1, abs=1e-15)
    assert z.imag == pytest.approx(math.sqrt(3) - 1, abs=1e-15)
    ca = M.make_model("cantor")
    firsts = [M.lambda_point(ca, i).real for i in range(1, 7)]
    assert firsts == pytest.approx([1/3, 2/3, 1/9, 2/9, 7/9, 8/9])


def test_enumeration_injective_prefix(model):
    pts = M.lambda_block(model, 10_000)
    assert len(np.unique(pts)) == len(pts)


def test_enumeration_lies_on_set(model):
    pts = M.lambda_block(model, 10_000)
    worst = max(M.distance(model, complex(z)) for z in pts)
    assert worst <= 1e-12


def test_enumeration_block_matches_point(model):
    pts = M.lambda_block(model, 50)
    for i in (1, 2, 17, 50):
        assert complex(pts[i - 1]) == M.lambda_point(model, i)


def test_perfectness_on_prefix(model):
    # every enumerated point has another one nearby, at shrinking radii
    # (the planar model needs ~1/r^2 points to reach radius r)
    radii = (1e-1, 1e-2, 3e-3) if model.kind == "unit_square" \
        else (1e-1, 1e-2, 1e-3)
    pts = np.asarray(M.lambda_block(model, 100_000))
    for i in (0, 3, 50):
        p = pts[i]
        d = np.abs(pts - p)
        d[i] = np.inf
        for r in radii:
            assert d.min() < r


def test_density_index_bound(model):
    # open dyadic cells hit by a large reference prefix are already hit
    # below the reported bound (empirical density statement)
    max_stage = {"segment": 8, "unit_square": 4,
                 "unit_circle": 5, "cantor": 6}[model.kind]
    for stage in range(1, max_stage + 1):
        bound = M.density_index_bound(model, stage)
        big = np.asarray(M.lambda_block(model, 64 * bound))
        side = 1 << stage

        def cells(pts):
            sx, sy = pts.real * side, pts.imag * side
            ok = (sx != np.floor(sx)) & (sy != np.floor(sy))
            if model.kind in ("segment", "cantor"):
                ok = sx != np.floor(sx)  # on-axis: 1-d cells
                return set(np.floor(sx[ok]).astype(int).tolist())
            return set(zip(np.floor(sx[ok]).astype(int).tolist(),
                           np.floor(sy[ok]).astype(int).tolist()))

        assert cells(big) == cells(big[:bound])


def test_distance_examples():
    assert M.distance(M.make_model("segment"), 2 + 0j) == 1.0
    assert M.distance(M.make_model("unit_circle"), 0j) == 1.0
    assert M.distance(M.make_model("unit_square"), 0.5 + 0.5j) == 0.0
    ca = M.make_model("cantor")
    assert M.distance(ca, 0.5 + 0j) == pytest.approx(1/6, abs=1e-15)
    assert M.distance(ca, complex(1/3, 0.25)) == pytest.approx(0.25)


def test_measure_examples():
    sq = M.make_model("unit_square")
    assert M.measure_in_rect(sq, (0, 0.5, 0, 0.5)) == 0.25
    assert M.measure_in_rect(sq, (0.75, 1.5, 0.75, 1.5)) == pytest.approx(0.0625)
    assert M.measure_in_rect(M.make_model("segment"), (-1, 2, -1, 2)) == 0.0
    with pytest.raises(ValueError):
        M.measure_in_rect(sq, (1, 0, 0, 1))


@settings(max_examples=60, derandomize=True)
@given(
    x0=st.integers(0, 15), w=st.integers(1, 16),
    y0=st.integers(0, 15), h=st.integers(1, 16),
    sx=st.integers(1, 15), sy=st.integers(1, 15),
)
def test_measure_monotone_and_dyadic_additive(x0, w, y0, h, sx, sy):
    sq = M.make_model("unit_square")
    g = 1 / 16
    rect = (x0 * g, (x0 + w) * g, y0 * g, (y0 + h) * g)
    sub = (rect[0] + g / 4, rect[1], rect[2], rect[3])
    assert M.measure_in_rect(sq, sub) <= M.measure_in_rect(sq, rect)
    # split along a dyadic line: exactly additive
    xm = (x0 + min(sx, w)) * g if sx < w else (x0 + w / 2) * g
    left = (rect[0], xm, rect[2], rect[3])
    right = (xm, rect[1], rect[2], rect[3])
    assert (M.measure_in_rect(sq, left) + M.measure_in_rect(sq, right)
            == M.measure_in_rect(sq, rect))


def test_density_class_examples():
    sq = M.make_model("unit_square")
    seg = M.make_model("segment")
    assert M.density_class(sq, complex(1/3, 1/3)) is M.DensityClass.DENSITY_ONE
    assert M.density_class(sq, complex(0.5, 1/3)) is M.DensityClass.EXCEPTIONAL
    assert M.density_class(seg, complex(1/3, 0)) is M.DensityClass.EXCEPTIONAL
    assert M.density_class(seg, 2 + 0j) is M.DensityClass.OUTSIDE
    assert M.density_class(sq, complex(0, 0.5)) is M.DensityClass.EXCEPTIONAL


def test_density_class_never_outside_on_enumeration(model):
    for z in M.lambda_block(model, 500)[::11]:
        assert M.density_class(model, complex(z)) is not M.DensityClass.OUTSIDE


def test_cover_budget_and_stage_sums(model):
    budget = M.cover_budget(model)
    total = sum(M.cover_stage_diam_sq(model, n) for n in range(1, 21))
    assert total <= budget
    # closed-form stage sums match explicit enumeration
    for n in range(1, 5):
        c = M.cover_stage_centers(model, n)
        r = M.cover_stage_radius(model, n)
        assert len(c) == M.cover_stage_count(model, n)
        assert len(c) * 4 * r * r == pytest.approx(
            M.cover_stage_diam_sq(model, n), rel=1e-12)


def test_cover_balls_meet_set(model):
    for n in range(1, 5):
        r = M.cover_stage_radius(model, n)
        for center in M.cover_stage_centers(model, n)[::5]:
            assert M.distance(model, complex(center)) < r


def test_cover_hits_matches_enumeration(model):
    probe = [complex(0.31, 0.0), complex(0.77, 0.13), complex(1/3, 0)]
    if model.kind == "unit_circle":
        probe = [complex(math.cos(t), math.sin(t)) for t in (0.2, 2.5, 4.0)]
    for n in range(1, 6):
        centers = M.cover_stage_centers(model, n)
        r = M.cover_stage_radius(model, n)
        for z in probe:
            explicit = int(np.count_nonzero(np.abs(z - centers) < r))
            assert explicit == M.cover_hits(model, z, n)


def test_cover_multiplicity_segment():
    seg = M.make_model("segment")
    z = complex(1/3, 0)
    assert all(M.cover_hits(seg, z, n) >= 1 for n in range(1, 21))


def test_exceptional_cover_prefix():
    seg = M.make_model("segment")
    balls = M.exceptional_cover(seg, 10)
    assert len(balls) == 10
    assert balls[0].center == 0j and balls[0].radius == 0.5
    assert sum(b.diam_sq for b in balls) <= M.cover_budget(seg)
    assert M.cover_prefix_stages(seg, 2056) == 10


def test_validate_model_clean(model):
    report = M.validate_model(model, 1000)
    assert report.distinct
    assert report.duplicates == ()
    assert report.min_gap > 0
    assert report.isolated_warnings == ()
    d = report.to_json_dict()
    assert set(d) == {"distinct", "duplicates", "min_gap",
                      "isolated_warnings"}


def test_validate_duplicate_raises():
    pts = np.array([0.5 + 0j, 0.5 + 0j, 0.25 + 0j])
    with pytest.raises(DuplicateEigenvalue) as exc:
        M.validate_points(pts)
    assert (exc.value.i, exc.value.j) == (1, 2)
    report = M.validate_points(pts, raise_on_duplicate=False)
    assert not report.distinct and (1, 2) in report.duplicates


def test_validate_isolated_warning():
    pts = np.array([0 + 0j, 0.001 + 0j, 0.002 + 0j, 5 + 0j])
    report = M.validate_points(pts, isolated_radius=0.05)
    assert report.isolated_warnings == (4,)


def test_set_points_near(model):
    anchor = M.lambda_point(model, 3)
    got = list(M.set_points_near(model, anchor, 1e-3, 40))
    assert got, "no candidates produced"
    for cand in got:
        assert cand != anchor
        assert abs(cand - anchor) <= 1e-3 * (1 + 1e-9)
        assert M.distance(model, cand) <= 1e-12


def test_cantor_ratio_parameter():
    ca = M.make_model("cantor", {"ratio": 0.4})
    assert ca.ratio == 0.4
    pts = M.lambda_block(ca, 100)
    assert max(M.distance(ca, complex(z)) for z in pts) <= 1e-12
    with pytest.raises(ValueError):
        M.make_model("cantor", {"ratio": 0.5})
