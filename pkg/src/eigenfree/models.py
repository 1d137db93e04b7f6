"""Concrete perfect compact spectrum models.

Each model is a perfect compact subset of the plane together with a dense,
injective, deterministic enumeration of eigenvalues:

  segment      [0,1] on the real axis; golden-rotation enumeration
               x_i = frac(i * phi), phi = (1+sqrt(5))/2.
  unit_square  [0,1]^2; Kronecker enumeration (frac(i*sqrt2), frac(i*sqrt3)).
  unit_circle  |z| = 1; golden-angle rotation on the circle.
  cantor       middle-removal Cantor set with child ratio rho (default 1/3,
               planar measure zero); enumeration lists removed-interval
               endpoints level by level, left to right.

All operations are pure functions of (model, arguments); enumerated blocks
are cached read-only.  The covering stream for the measure-zero part is
staged and deterministic: stage n fully covers the exceptional set with
balls whose diameters are square-summable over the whole stream, so any
prefix certifies a finite piece of the infinite covering multiplicity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DuplicateEigenvalue
from .util import require_finite

PHI = (1.0 + math.sqrt(5.0)) / 2.0
SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# Set membership tolerance for floating point queries.
MEMBER_TOL = 1e-12

# Grid-line (dyadic coordinate) detection is capped at this stage: every
# double is dyadic at stage <= 53, so an uncapped test would classify every
# representable interior point as exceptional.  Stage-40 squares have side
# ~9e-13, below any resolution used by the coverings or selections here.
DYADIC_STAGE_CAP = 40

MODEL_IDS = ("segment", "unit_square", "unit_circle", "cantor")


class DensityClass(enum.Enum):
    DENSITY_ONE = "density_one"
    EXCEPTIONAL = "exceptional"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Ball:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius

    @property
    def diam_sq(self) -> float:
        return 4.0 * self.radius * self.radius


@dataclass(frozen=True)
class SpectrumModel:
    kind: str
    ratio: float = 1.0 / 3.0  # cantor child ratio; ignored elsewhere

    def __post_init__(self):
        if self.kind not in MODEL_IDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "cantor" and not (0.0 < self.ratio < 0.5):
            raise ValueError("cantor ratio must lie in (0, 1/2)")

    @property
    def has_positive_area(self) -> bool:
        return self.kind == "unit_square"

    @property
    def params(self) -> dict:
        return {"ratio": self.ratio} if self.kind == "cantor" else {}


def make_model(model_id: str, params: dict | None = None) -> SpectrumModel:
    params = params or {}
    if model_id == "cantor":
        return SpectrumModel("cantor", float(params.get("ratio", 1.0 / 3.0)))
    if params:
        raise ValueError(f"model {model_id!r} takes no parameters")
    return SpectrumModel(model_id)


# ---------------------------------------------------------------------------
# enumeration


def _cantor_interval(ratio: float, level: int, q: int) -> tuple[float, float]:
    """Surviving interval number q (left to right) at the given level."""
    a, b = 0.0, 1.0
    for bit in range(level - 1, -1, -1):
        length = b - a
        if (q >> bit) & 1:
            a = b - ratio * length
        else:
            b = a + ratio * length
    return a, b


def _cantor_point(ratio: float, i: int) -> float:
    # Level l >= 1 contributes 2^l endpoints; cumulative count 2^(l+1) - 2.
    level = 1
    while (1 << (level + 1)) - 2 < i:
        level += 1
    j = i - ((1 << level) - 2) - 1  # 0-based within the level
    q, side = divmod(j, 2)
    a, b = _cantor_interval(ratio, level - 1, q)
    length = b - a
    return a + ratio * length if side == 0 else b - ratio * length


@lru_cache(maxsize=64)
def _lambda_block_cached(model: SpectrumModel, count: int) -> np.ndarray:
    i = np.arange(1, count + 1, dtype=np.float64)
    if model.kind == "segment":
        pts = (i * PHI) % 1.0 + 0j
    elif model.kind == "unit_square":
        pts = (i * SQRT2) % 1.0 + 1j * ((i * SQRT3) % 1.0)
    elif model.kind == "unit_circle":
        theta = 2.0 * math.pi * ((i * PHI) % 1.0)
        pts = np.cos(theta) + 1j * np.sin(theta)
    else:  # cantor
        xs = np.array([_cantor_point(model.ratio, k)
                       for k in range(1, count + 1)])
        pts = xs + 0j
    pts = np.ascontiguousarray(pts, dtype=np.complex128)
    pts.flags.writeable = False
    return pts


def lambda_block(model: SpectrumModel, count: int) -> np.ndarray:
    """Eigenvalues lambda_1..lambda_count as a read-only complex array."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return _lambda_block_cached(model, int(count))


def lambda_point(model: SpectrumModel, i: int) -> complex:
    """The i-th eigenvalue of the model's enumeration (1-based)."""
    if i < 1:
        raise ValueError("enumeration is 1-based")
    if model.kind == "segment":
        return complex((i * PHI) % 1.0, 0.0)
    if model.kind == "unit_square":
        return complex((i * SQRT2) % 1.0, (i * SQRT3) % 1.0)
    if model.kind == "unit_circle":
        theta = 2.0 * math.pi * ((i * PHI) % 1.0)
        return complex(math.cos(theta), math.sin(theta))
    return complex(_cantor_point(model.ratio, i), 0.0)


def density_index_bound(model: SpectrumModel, stage: int) -> int:
    """Index bound M(n): every open stage-n dyadic square meeting the set
    contains an enumerated point of index <= M(n).  Calibrated empirically
    (see the model tests); generous constants."""
    if model.kind == "segment":
        return 8 << stage
    if model.kind == "unit_square":
        return 64 * 4 ** stage
    if model.kind == "unit_circle":
        # cells barely clipped by the circle hold arcs ~ sqrt(clip depth),
        # so the bound grows with the square of the cell count
        return 16 * 4 ** stage
    depth = math.ceil(stage * math.log(2.0) / math.log(1.0 / model.ratio))
    return 1 << (depth + 4)


# ---------------------------------------------------------------------------
# geometry: distance, planar measure, density classification


def _cantor_axis_distance(ratio: float, x: float) -> float:
    if x <= 0.0:
        return -x
    if x >= 1.0:
        return x - 1.0
    a, b = 0.0, 1.0
    while True:
        length = b - a
        if length < 1e-18:
            return 0.0
        left_hi = a + ratio * length
        right_lo = b - ratio * length
        if x <= left_hi:
            b = left_hi
        elif x >= right_lo:
            a = right_lo
        else:
            return min(x - left_hi, right_lo - x)


def distance(model: SpectrumModel, z: complex) -> float:
    """Exact Euclidean distance from z to the model's set."""
    z = require_finite(z, "query point")
    x, y = z.real, z.imag
    if model.kind == "segment":
        return math.hypot(x - min(max(x, 0.0), 1.0), y)
    if model.kind == "unit_square":
        dx = max(0.0, -x, x - 1.0)
        dy = max(0.0, -y, y - 1.0)
        return math.hypot(dx, dy)
    if model.kind == "unit_circle":
        return abs(math.hypot(x, y) - 1.0)
    return math.hypot(_cantor_axis_distance(model.ratio, x), y)


def measure_in_rect(model: SpectrumModel,
                    rect: tuple[float, float, float, float]) -> float:
    """Planar Lebesgue measure of (set intersect rect); rect = (x0,x1,y0,y1)."""
    x0, x1, y0, y1 = rect
    if x0 > x1 or y0 > y1:
        raise ValueError("rectangle must satisfy min <= max per axis")
    if model.kind != "unit_square":
        return 0.0
    w = min(x1, 1.0) - max(x0, 0.0)
    h = min(y1, 1.0) - max(y0, 0.0)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def is_dyadic_coordinate(x: float, cap: int = DYADIC_STAGE_CAP) -> bool:
    """True when x = k * 2^-n exactly for some n <= cap (x in [0,1])."""
    v = x * float(1 << cap)  # scaling by a power of two is exact
    return v == math.floor(v)


def density_class(model: SpectrumModel, z: complex) -> DensityClass:
    """Classify z as a planar density-one point off the dyadic grid, an
    exceptional set point, or a point outside the set.

    Measure-zero models have no density-one points at all, so their whole
    set is exceptional.
    """
    z = require_finite(z, "query point")
    if model.kind == "unit_square":
        x, y = z.real, z.imag
        if distance(model, z) > MEMBER_TOL:
            return DensityClass.OUTSIDE
        inside = 0.0 < x < 1.0 and 0.0 < y < 1.0
        if inside and not is_dyadic_coordinate(x) and not is_dyadic_coordinate(y):
            return DensityClass.DENSITY_ONE
        return DensityClass.EXCEPTIONAL
    if distance(model, z) <= MEMBER_TOL:
        return DensityClass.EXCEPTIONAL
    return DensityClass.OUTSIDE


# ---------------------------------------------------------------------------
# covering stream for the exceptional set


def cover_stage_count(model: SpectrumModel, stage: int) -> int:
    if stage < 1:
        raise ValueError("cover stages are 1-based")
    if model.kind == "segment":
        return (1 << stage) + 1
    if model.kind == "unit_square":
        return 2 * ((1 << stage) + 1) * (4 ** stage + 1)
    if model.kind == "unit_circle":
        return 1 << (stage + 3)
    return 1 << stage


def cover_stage_radius(model: SpectrumModel, stage: int) -> float:
    if model.kind == "segment":
        return 2.0 ** -stage
    if model.kind == "unit_square":
        return 4.0 ** -stage
    if model.kind == "unit_circle":
        return 2.0 ** -stage
    return model.ratio ** stage


def cover_stage_diam_sq(model: SpectrumModel, stage: int) -> float:
    """Exact sum of diam^2 over the stage (count * (2r)^2)."""
    r = cover_stage_radius(model, stage)
    return cover_stage_count(model, stage) * 4.0 * r * r


def cover_budget(model: SpectrumModel) -> float:
    """Closed-form sum of diam^2 over the full infinite stream."""
    if model.kind == "segment":
        return 16.0 / 3.0
    if model.kind == "unit_square":
        return 8.0 * (1.0 + 1.0 / 3.0 + 1.0 / 7.0 + 1.0 / 15.0)
    if model.kind == "unit_circle":
        return 32.0
    s = 2.0 * model.ratio * model.ratio
    return 4.0 * s / (1.0 - s)


def cover_stage_centers(model: SpectrumModel, stage: int) -> np.ndarray:
    """Centers of the stage's balls, in stream order."""
    if stage < 1:
        raise ValueError("cover stages are 1-based")
    if model.kind == "segment":
        h = 2.0 ** -stage
        return np.arange((1 << stage) + 1, dtype=np.float64) * h + 0j
    if model.kind == "unit_square":
        h = 2.0 ** -stage
        g = 4.0 ** -stage
        lines = np.arange((1 << stage) + 1, dtype=np.float64) * h
        ticks = np.arange(4 ** stage + 1, dtype=np.float64) * g
        vert = (lines[:, None] + 1j * ticks[None, :]).ravel()
        horz = (ticks[None, :] + 1j * lines[:, None]).ravel()
        return np.concatenate([vert, horz])
    if model.kind == "unit_circle":
        m = 1 << (stage + 3)
        theta = 2.0 * math.pi * np.arange(m, dtype=np.float64) / m
        return np.cos(theta) + 1j * np.sin(theta)
    mids = []
    for q in range(1 << stage):
        a, b = _cantor_interval(model.ratio, stage, q)
        mids.append(0.5 * (a + b))
    return np.asarray(mids, dtype=np.complex128)


def cover_flat(model: SpectrumModel, count: int):
    """First `count` balls of the flat stream.

    Returns (centers, radii, stage_of) arrays in stream order: all of stage
    1, then stage 2, and so on.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    centers, radii, stages = [], [], []
    have, stage = 0, 1
    while have < count:
        c = cover_stage_centers(model, stage)
        take = min(len(c), count - have)
        centers.append(c[:take])
        r = cover_stage_radius(model, stage)
        radii.append(np.full(take, r))
        stages.append(np.full(take, stage, dtype=np.int64))
        have += take
        stage += 1
    return (np.concatenate(centers), np.concatenate(radii),
            np.concatenate(stages))


def exceptional_cover(model: SpectrumModel, count: int) -> list[Ball]:
    """Deterministic prefix of the exceptional-set covering stream."""
    centers, radii, _ = cover_flat(model, count)
    return [Ball(complex(c), float(r)) for c, r in zip(centers, radii)]


def cover_prefix_stages(model: SpectrumModel, nballs: int) -> int:
    """Number of complete cover stages inside a flat prefix of nballs."""
    stage, used = 0, 0
    while True:
        nxt = cover_stage_count(model, stage + 1)
        if used + nxt > nballs:
            return stage
        used += nxt
        stage += 1


def _count_hits_1d(centers: np.ndarray, z: complex, r: float) -> int:
    d2 = (z.real - centers.real) ** 2 + (z.imag - centers.imag) ** 2
    return int(np.count_nonzero(d2 < r * r))


def cover_hits(model: SpectrumModel, z: complex, stage: int) -> int:
    """How many stage-n balls contain z (closed form, no enumeration)."""
    z = require_finite(z, "query point")
    r = cover_stage_radius(model, stage)
    x, y = z.real, z.imag
    if model.kind == "segment":
        h = 2.0 ** -stage
        klo = max(0, math.floor((x - r) / h) - 1)
        khi = min(1 << stage, math.ceil((x + r) / h) + 1)
        ks = np.arange(klo, khi + 1, dtype=np.float64)
        return _count_hits_1d(ks * h + 0j, z, r)
    if model.kind == "unit_square":
        h = 2.0 ** -stage
        g = 4.0 ** -stage
        hits = 0
        for coord, other in ((x, y), (y, x)):
            jlo = max(0, math.floor((coord - r) / h) - 1)
            jhi = min(1 << stage, math.ceil((coord + r) / h) + 1)
            for j in range(jlo, jhi + 1):
                dline = coord - j * h
                rem = r * r - dline * dline
                if rem <= 0.0:
                    continue
                half = math.sqrt(rem)
                tlo = max(0, math.floor((other - half) / g) - 1)
                thi = min(4 ** stage, math.ceil((other + half) / g) + 1)
                ts = np.arange(tlo, thi + 1, dtype=np.float64)
                d2 = dline * dline + (other - ts * g) ** 2
                hits += int(np.count_nonzero(d2 < r * r))
        return hits
    if model.kind == "unit_circle":
        m = 1 << (stage + 3)
        theta = math.atan2(y, x) % (2.0 * math.pi)
        k0 = int(round(theta * m / (2.0 * math.pi)))
        ks = np.arange(k0 - 4, k0 + 5) % m
        ang = 2.0 * math.pi * ks / m
        centers = np.cos(ang) + 1j * np.sin(ang)
        return _count_hits_1d(np.unique(centers), z, r)
    # cantor: prune the interval tree around x
    hits = 0
    stack = [(0, 0.0, 1.0)]
    while stack:
        level, a, b = stack.pop()
        if x < a - 2.0 * r or x > b + 2.0 * r:
            continue
        if level == stage:
            mid = 0.5 * (a + b)
            if (x - mid) ** 2 + y * y < r * r:
                hits += 1
            continue
        length = b - a
        stack.append((level + 1, a, a + model.ratio * length))
        stack.append((level + 1, b - model.ratio * length, b))
    return hits


# ---------------------------------------------------------------------------
# candidate set points near a given set point (for the node search)


def set_points_near(model: SpectrumModel, center: complex, radius: float,
                    budget: int):
    """Yield up to `budget` set points at distance <= radius from `center`
    (itself a set point), approaching it geometrically.

    Candidates are exact members of the set up to MEMBER_TOL and never equal
    to `center`; collision screening against other points is the caller's
    job.
    """
    x, y = center.real, center.imag
    produced = 0
    if model.kind in ("segment", "unit_square"):
        r = radius
        floor = 4.0 * max(math.ulp(abs(x) + 1.0), math.ulp(abs(y) + 1.0))
        if model.kind == "segment":
            offsets = [(1.0, 0.0), (-1.0, 0.0)]
        else:
            s = 1.0 / SQRT2
            offsets = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0),
                       (s, s), (-s, s), (s, -s), (-s, -s)]
        while r >= floor and produced < budget:
            for ox, oy in offsets:
                cx, cy = x + ox * r, y + oy * r
                if not (0.0 <= cx <= 1.0):
                    continue
                if model.kind == "unit_square" and not (0.0 <= cy <= 1.0):
                    continue
                cand = complex(cx, cy if model.kind == "unit_square" else 0.0)
                if cand != center:
                    yield cand
                    produced += 1
                    if produced >= budget:
                        return
            r *= 0.5
        return
    if model.kind == "unit_circle":
        theta = math.atan2(y, x)
        arc = min(radius, math.pi)
        floor = 8.0 * math.ulp(1.0)
        while arc >= floor and produced < budget:
            for sign in (1.0, -1.0):
                ang = theta + sign * arc
                cand = complex(math.cos(ang), math.sin(ang))
                if cand != center and abs(cand - center) <= radius:
                    yield cand
                    produced += 1
                    if produced >= budget:
                        return
            arc *= 0.5
        return
    # cantor: descend the surviving-interval chain that contains x and yield
    # the removed-gap endpoints, which approach x geometrically.
    a, b = 0.0, 1.0
    while produced < budget:
        length = b - a
        if length < 8.0 * math.ulp(1.0):
            return
        left_hi = a + model.ratio * length
        right_lo = b - model.ratio * length
        for g in (left_hi, right_lo):
            if g != x and abs(g - x) <= radius and produced < budget:
                yield complex(g, 0.0)
                produced += 1
        if x <= left_hi:
            b = left_hi
        elif x >= right_lo:
            a = right_lo
        else:
            # x sits in the open gap: not a set point; stop.
            return


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    prefix: int
    distinct: bool
    duplicates: tuple
    min_gap: float
    isolated_warnings: tuple

    def to_json_dict(self) -> dict:
        return {
            "distinct": self.distinct,
            "duplicates": [list(p) for p in self.duplicates],
            "min_gap": self.min_gap,
            "isolated_warnings": list(self.isolated_warnings),
        }


def validate_points(points: np.ndarray, isolated_radius: float = 0.05,
                    raise_on_duplicate: bool = True) -> ValidationReport:
    """Pairwise-distinctness and isolation screening of an eigenvalue prefix.

    Indices in the report are 1-based to match the enumeration.
    """
    n = len(points)
    if n < 2:
        raise ValueError("need a prefix of at least 2 eigenvalues")
    order = np.lexsort((points.imag, points.real))
    srt = points[order]
    eq = srt[1:] == srt[:-1]
    duplicates = []
    for k in np.nonzero(eq)[0]:
        i, j = int(order[k]) + 1, int(order[k + 1]) + 1
        duplicates.append((min(i, j), max(i, j)))
    if duplicates and raise_on_duplicate:
        raise DuplicateEigenvalue(*duplicates[0])
    # per-point nearest neighbour via chunked pairwise distances
    nn = np.full(n, np.inf)
    chunk = 2048
    for a in range(0, n, chunk):
        block = points[a:a + chunk]
        d = np.abs(block[:, None] - points[None, :])
        d[np.arange(len(block)), np.arange(a, a + len(block))] = np.inf
        nn[a:a + len(block)] = d.min(axis=1)
    min_gap = float(nn.min())
    isolated = tuple(int(i) + 1 for i in np.nonzero(nn > isolated_radius)[0])
    return ValidationReport(
        prefix=n,
        distinct=not duplicates,
        duplicates=tuple(duplicates),
        min_gap=min_gap,
        isolated_warnings=isolated,
    )


def validate_model(model: SpectrumModel, prefix: int,
                   isolated_radius: float = 0.05) -> ValidationReport:
    """Check the enumeration prefix for duplicates and isolated points.

    Raises DuplicateEigenvalue when two indices carry the same eigenvalue
    (the construction's standing hypothesis); isolated points only warn.
    """
    return validate_points(lambda_block(model, prefix), isolated_radius)
