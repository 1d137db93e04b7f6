"""Construction of a vector whose resolvent energy diverges on the spectrum.

The selection walks stages n = 0, 1, ...; at stage n every open dyadic
square with positive set measure receives a fresh eigenvalue index chosen
inside it, and the n-th ball of the exceptional covering stream receives
one fresh index chosen inside the ball.  Picked indices stay disjoint
across stages and classes; indices below the horizon never picked form the
leftover class.  The assembled vector u carries weights

    1/((n+2) * sqrt(beta_n))   on stage-n square picks (beta_n picks),
    diam(O_n)                  on the stage-n ball pick,
    1/(i+1)                    on leftover index i,

so that every coordinate is nonzero and the squared norm splits as
sum (n+2)^-2 + sum diam^2 + sum (i+1)^-2, all finite.  Pick search always
scans candidates in enumeration order, so a rebuild reproduces the same
plan bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import HitsEigenvalue, OutsideSpectrum, PickExhausted
from .models import (Ball, DensityClass, SpectrumModel, cover_flat,
                     cover_hits, cover_prefix_stages, density_class,
                     lambda_block)
from .util import LineFit, fit_line, trigamma

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class WeightedVector:
    """Sparse coefficient sequence over 1-based basis indices."""
    indices: np.ndarray
    values: np.ndarray
    norm_sq: float

    @classmethod
    def from_entries(cls, indices, values) -> "WeightedVector":
        idx = np.ascontiguousarray(indices, dtype=np.int64)
        val = np.ascontiguousarray(values, dtype=np.complex128)
        if len(idx) != len(val):
            raise ValueError("index/value length mismatch")
        if len(idx):
            order = np.argsort(idx, kind="stable")
            idx, val = idx[order], val[order]
            if np.any(idx[1:] == idx[:-1]):
                raise ValueError("duplicate indices")
            if idx[0] < 1:
                raise ValueError("indices are 1-based")
            if np.any(val == 0):
                raise ValueError("zero entries are not stored")
        norm_sq = float(np.sum(np.abs(val) ** 2))
        return cls(idx, val, norm_sq)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def get(self, i: int) -> complex:
        pos = np.searchsorted(self.indices, i)
        if pos < len(self.indices) and self.indices[pos] == i:
            return complex(self.values[pos])
        return 0.0

    def prefix(self, upto: int):
        """(indices, values) restricted to indices <= upto."""
        pos = int(np.searchsorted(self.indices, upto, side="right"))
        return self.indices[:pos], self.values[:pos]

    def to_json_dict(self) -> dict:
        return {
            "entries": [[int(i), v.real, v.imag]
                        for i, v in zip(self.indices, self.values)],
            "norm_sq": self.norm_sq,
        }


@dataclass(frozen=True)
class StageRecord:
    stage: int
    square_ls: np.ndarray     # columns of squares with picks, sorted
    square_ms: np.ndarray
    i_picks: np.ndarray       # aligned with squares
    ball: Ball
    ball_cover_stage: int
    j_pick: int

    @property
    def beta(self) -> int:
        return len(self.i_picks)


@dataclass(frozen=True)
class SelectionPlan:
    model: SpectrumModel
    max_stage: int
    horizon: int
    stages: tuple
    leftover: np.ndarray

    def beta(self, n: int) -> int:
        return self.stages[n].beta

    @property
    def picked_count(self) -> int:
        return sum(s.beta + 1 for s in self.stages)

    def ball_arrays(self):
        """Centers, radii, cover stages and picked lambdas of all plan
        balls, in stage order."""
        centers = np.array([s.ball.center for s in self.stages])
        radii = np.array([s.ball.radius for s in self.stages])
        cstage = np.array([s.ball_cover_stage for s in self.stages])
        jidx = np.array([s.j_pick for s in self.stages], dtype=np.int64)
        lam = lambda_block(self.model, self.horizon)
        return centers, radii, cstage, lam[jidx - 1]

    def processed_cover_stages(self) -> int:
        """Complete covering stages whose balls all carry picks."""
        return cover_prefix_stages(self.model, len(self.stages))

    def to_json_dict(self) -> dict:
        return {
            "model": {"id": self.model.kind, "params": self.model.params},
            "max_stage": self.max_stage,
            "horizon": self.horizon,
            "stages": [
                {
                    "stage": s.stage,
                    "beta": s.beta,
                    "squares": [[int(l), int(m)] for l, m in
                                zip(s.square_ls, s.square_ms)],
                    "i_picks": [int(i) for i in s.i_picks],
                    "ball": {"center": [s.ball.center.real,
                                        s.ball.center.imag],
                             "radius": s.ball.radius,
                             "cover_stage": s.ball_cover_stage},
                    "j_pick": s.j_pick,
                }
                for s in self.stages
            ],
            "leftover_count": int(len(self.leftover)),
        }


def _first_unused(candidates: np.ndarray, used: np.ndarray) -> int | None:
    """Smallest unused index among ascending candidates."""
    free = candidates[~used[candidates]]
    return int(free[0]) if len(free) else None


def build_selection(model: SpectrumModel, max_stage: int,
                    horizon: int) -> SelectionPlan:
    """Run stages 0..max_stage over a validated enumeration prefix.

    Raises PickExhausted when some target square or ball holds no fresh
    eigenvalue below the horizon.
    """
    if max_stage < 0 or horizon < 1:
        raise ValueError("max_stage >= 0 and horizon >= 1 required")
    lam = lambda_block(model, horizon)
    used = np.zeros(horizon + 1, dtype=bool)

    centers, radii, cstages = cover_flat(model, max_stage + 1)

    one_dim = model.kind in ("segment", "cantor")
    if one_dim:
        xs = lam.real
        pos_order = np.argsort(xs, kind="stable")
        xs_sorted = xs[pos_order]

    records = []
    for n in range(max_stage + 1):
        if model.has_positive_area:
            side = 1 << n
            free = np.nonzero(~used[1:])[0] + 1
            pts = lam[free - 1]
            sx = pts.real * side
            sy = pts.imag * side
            interior = ((0.0 < pts.real) & (pts.real < 1.0)
                        & (0.0 < pts.imag) & (pts.imag < 1.0))
            off_grid = (sx != np.floor(sx)) & (sy != np.floor(sy))
            ok = interior & off_grid
            cells = (np.floor(sx[ok]).astype(np.int64) * side
                     + np.floor(sy[ok]).astype(np.int64))
            cand = free[ok]
            uniq, first = np.unique(cells, return_index=True)
            if len(uniq) < side * side:
                missing = np.setdiff1d(
                    np.arange(side * side, dtype=np.int64), uniq)[0]
                raise PickExhausted(
                    n, f"square (l={missing // side}, m={missing % side})")
            picks = cand[first]
            used[picks] = True
            sq_l = (uniq // side).astype(np.int64)
            sq_m = (uniq % side).astype(np.int64)
        else:
            picks = np.empty(0, dtype=np.int64)
            sq_l = sq_m = np.empty(0, dtype=np.int64)

        center, radius = complex(centers[n]), float(radii[n])
        if one_dim:
            lo = np.searchsorted(xs_sorted, center.real - radius, "left")
            hi = np.searchsorted(xs_sorted, center.real + radius, "right")
            ball_cand = np.sort(pos_order[lo:hi]) + 1
            inside = np.abs(lam[ball_cand - 1] - center) < radius
            ball_cand = ball_cand[inside]
        else:
            ball_cand = np.nonzero(np.abs(lam - center) < radius)[0] + 1
        j = _first_unused(ball_cand, used)
        if j is None:
            raise PickExhausted(
                n, f"ball at {center} radius {radius:.3g}")
        used[j] = True

        records.append(StageRecord(
            stage=n, square_ls=sq_l, square_ms=sq_m, i_picks=picks,
            ball=Ball(center, radius), ball_cover_stage=int(cstages[n]),
            j_pick=j))

    leftover = np.nonzero(~used[1:])[0] + 1
    return SelectionPlan(model=model, max_stage=max_stage, horizon=horizon,
                         stages=tuple(records), leftover=leftover)


def stage_weight(n: int, beta: int) -> float:
    """Weight on each square pick of stage n (beta picks)."""
    return 1.0 / ((n + 2) * math.sqrt(beta))


def assemble_u(plan: SelectionPlan, model: SpectrumModel | None = None
               ) -> WeightedVector:
    """Assemble u from the plan: square picks, ball picks, leftovers."""
    idx_parts, val_parts = [], []
    for rec in plan.stages:
        if rec.beta:
            w = stage_weight(rec.stage, rec.beta)
            idx_parts.append(rec.i_picks)
            val_parts.append(np.full(rec.beta, w, dtype=np.complex128))
        idx_parts.append(np.array([rec.j_pick], dtype=np.int64))
        val_parts.append(np.array([2.0 * rec.ball.radius],
                                  dtype=np.complex128))
    if len(plan.leftover):
        idx_parts.append(plan.leftover)
        val_parts.append((1.0 / (plan.leftover + 1.0)).astype(np.complex128))
    return WeightedVector.from_entries(
        np.concatenate(idx_parts), np.concatenate(val_parts))


def component_norms_sq(plan: SelectionPlan, u: WeightedVector
                       ) -> tuple[float, float, float]:
    """Squared norms of the square-pick, ball-pick and leftover parts."""
    i_idx = np.concatenate([r.i_picks for r in plan.stages]) \
        if plan.stages else np.empty(0, dtype=np.int64)
    j_idx = np.array([r.j_pick for r in plan.stages], dtype=np.int64)

    def part(ids):
        if not len(ids):
            return 0.0
        pos = np.searchsorted(u.indices, np.sort(ids))
        return float(np.sum(np.abs(u.values[pos]) ** 2))

    return part(i_idx), part(j_idx), part(plan.leftover)


def stage_weight_tail(max_stage: int) -> float:
    """sum_{n > max_stage} (n+2)^-2."""
    return trigamma(max_stage + 3.0)


def leftover_tail(horizon: int) -> float:
    """sum_{i > horizon} (i+1)^-2."""
    return trigamma(horizon + 2.0)


def resolvent_energy(u: WeightedVector, model: SpectrumModel, z: complex,
                     upto: int) -> float:
    """Partial sum sum_{i<=upto} |u_i|^2 / |z - lambda_i|^2."""
    idx, vals = u.prefix(upto)
    if not len(idx):
        return 0.0
    lam = lambda_block(model, upto)[idx - 1]
    hit = np.nonzero(lam == z)[0]
    if len(hit):
        raise HitsEigenvalue(int(idx[hit[0]]))
    w2 = np.abs(vals) ** 2
    return float(kernels.resolvent_sum(w2, lam, np.array([z]))[0])


@dataclass(frozen=True)
class GrowthReport:
    """Stagewise divergence evidence at one spectrum point.

    density_one: values[n] is the stage sum over square picks of
    1/|z-lambda|^2 scaled by 4^-stage; the fit runs on the suffix-minimum
    envelope so single near-hits cannot fake or break the trend.
    exceptional: values[s] counts plan balls of covering stage s that
    contain both z and their picked eigenvalue (each such ball's term
    diam^2/|z-lambda_j|^2 is >= 1; per_ball_ok records that check).
    """
    kind: str
    z: complex
    stages: tuple
    values: tuple
    envelope: tuple
    lower_bound: tuple
    fit: LineFit
    unit_total: int | None = None
    covered_stages: int | None = None
    processed_stages: int | None = None
    per_ball_ok: bool = True

    def to_csv_rows(self):
        for s, v, lb in zip(self.stages, self.values, self.lower_bound):
            yield (s, v, lb)


def divergence_diagnostic(plan: SelectionPlan, u: WeightedVector, z: complex,
                          stages=None, alpha: int = 2) -> GrowthReport:
    """Growth certificate for the resolvent energy at an in-set point z.

    The plan supplies the pick structure that u alone does not carry.
    """
    model = plan.model
    dc = density_class(model, z)
    if dc is DensityClass.OUTSIDE:
        raise OutsideSpectrum(z)
    lam = lambda_block(model, plan.horizon)

    if dc is DensityClass.DENSITY_ONE:
        if stages is None:
            stages = list(range(plan.max_stage + 1))
        vals = []
        for n in stages:
            rec = plan.stages[n]
            if rec.beta == 0:
                vals.append(0.0)
                continue
            d2 = np.abs(z - lam[rec.i_picks - 1]) ** 2
            vals.append(float(4.0 ** -n * np.sum(1.0 / d2)))
        env = list(vals)
        for i in range(len(env) - 2, -1, -1):
            env[i] = min(env[i], env[i + 1])
        lb = [0.5 * LOG2 * (n - alpha) for n in stages]
        if len(stages) >= 2:
            fit = fit_line(stages, env)
        else:
            fit = LineFit(0.0, env[-1] if env else 0.0, math.inf,
                          len(stages))
        return GrowthReport(
            kind="density_one", z=z, stages=tuple(stages),
            values=tuple(vals), envelope=tuple(env), lower_bound=tuple(lb),
            fit=fit)

    # exceptional branch: covering-multiplicity units
    processed = plan.processed_cover_stages()
    if stages is None:
        stages = list(range(1, processed + 1))
    if not stages:
        return GrowthReport(
            kind="exceptional", z=z, stages=(), values=(), envelope=(),
            lower_bound=(), fit=LineFit(0.0, 0.0, math.inf, 0),
            unit_total=0, covered_stages=0, processed_stages=processed)
    centers, radii, cstage, lam_j = plan.ball_arrays()
    inside = np.abs(z - centers) < radii
    contrib_ok = True
    units = np.zeros(max(stages) + 1, dtype=np.int64)
    for b in np.nonzero(inside)[0]:
        s = int(cstage[b])
        if s <= max(stages):
            units[s] += 1
        term = (2.0 * radii[b]) ** 2 / abs(z - lam_j[b]) ** 2
        if term < 1.0 - 1e-9:
            contrib_ok = False
    vals = [int(units[s]) for s in stages]
    cum = np.cumsum(vals)
    covered = sum(1 for s in stages if cover_hits(model, z, s) >= 1)
    lb = [1 if s <= processed else 0 for s in stages]
    if len(stages) >= 2:
        fit = fit_line(stages, cum)
    else:
        fit = LineFit(0.0, float(cum[-1]), math.inf, len(stages))
    return GrowthReport(
        kind="exceptional", z=z, stages=tuple(stages), values=tuple(vals),
        envelope=tuple(int(c) for c in cum), lower_bound=tuple(lb), fit=fit,
        unit_total=int(cum[-1]), covered_stages=covered,
        processed_stages=processed, per_ball_ok=contrib_ok)


def summability_diagnostic(u: WeightedVector, p: float, upto: int) -> float:
    """Partial sum sum_{i<=upto} |u_i|^p."""
    if upto < 1:
        raise ValueError("upto must be >= 1")
    if p < 1.0:
        raise ValueError("p >= 1 required")
    _, vals = u.prefix(upto)
    if not len(vals):
        return 0.0
    return float(np.sum(np.abs(vals) ** p))
