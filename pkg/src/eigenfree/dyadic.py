"""Dyadic-square bookkeeping on the unit square.

Stage n splits [0,1]^2 into 4^n closed squares of side 2^-n; a point off
the stage's grid lines sits in exactly one open square.  Around that square
the block of all squares at most p-1 columns/rows away (side (2p-1)*2^-n)
shrinks regularly: it contains an inner square of side p*2^-n and fits in
the ball circumscribing a square of side 2p*2^-n, whose area is exactly
2*pi times the inner square's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OnGridLine, POutOfRange
from .util import require_finite


@dataclass(frozen=True)
class SquareIndex:
    n: int
    l: int
    m: int

    def __post_init__(self):
        side = 1 << self.n
        if not (0 <= self.l < side and 0 <= self.m < side):
            raise ValueError(f"square index out of range at stage {self.n}")

    @property
    def x0(self) -> float:
        return self.l * 2.0 ** -self.n

    @property
    def y0(self) -> float:
        return self.m * 2.0 ** -self.n

    @property
    def side(self) -> float:
        return 2.0 ** -self.n

    def contains_open(self, z: complex) -> bool:
        return (self.x0 < z.real < self.x0 + self.side
                and self.y0 < z.imag < self.y0 + self.side)


@dataclass(frozen=True)
class ShrinkCertificate:
    inner_area: float
    outer_ball_area: float

    @property
    def ratio(self) -> float:
        return self.outer_ball_area / self.inner_area


@dataclass(frozen=True)
class LRegion:
    """Block of stage-n squares within p-1 of the center square, clipped."""
    center: SquareIndex
    p: int
    l_lo: int
    l_hi: int
    m_lo: int
    m_hi: int
    certificate: ShrinkCertificate

    @property
    def rect(self) -> tuple[float, float, float, float]:
        h = 2.0 ** -self.center.n
        return (self.l_lo * h, (self.l_hi + 1) * h,
                self.m_lo * h, (self.m_hi + 1) * h)

    @property
    def area(self) -> float:
        x0, x1, y0, y1 = self.rect
        return (x1 - x0) * (y1 - y0)

    def contains(self, z: complex) -> bool:
        x0, x1, y0, y1 = self.rect
        return x0 <= z.real <= x1 and y0 <= z.imag <= y1


def square_index(z: complex, n: int) -> SquareIndex:
    """The unique stage-n open square containing z.

    Grid-line membership is exact: scaling by 2^n never rounds, so the
    comparison x * 2^n == floor(x * 2^n) is decisive.
    """
    z = require_finite(z, "query point")
    if n < 0:
        raise ValueError("stage must be nonnegative")
    x, y = z.real, z.imag
    if not (0.0 < x < 1.0 and 0.0 < y < 1.0):
        raise ValueError(f"{z} is not in the open unit square")
    scale = float(1 << n)
    sx, sy = x * scale, y * scale
    if sx == math.floor(sx) or sy == math.floor(sy):
        raise OnGridLine(z, n)
    return SquareIndex(n, int(math.floor(sx)), int(math.floor(sy)))


def p_max(z: complex, n: int) -> int:
    """Largest block half-width around z's square that stays in [0,1]^2."""
    sq = square_index(z, n)
    side = 1 << n
    return min(sq.m + 1, sq.l + 1, side - sq.m, side - sq.l)


def l_region(z: complex, n: int, p: int) -> LRegion:
    """The (2p-1)^2-square block around z's square, with its shrink
    certificate (inner square side p*2^-n, outer ball over side 2p*2^-n)."""
    sq = square_index(z, n)
    if p < 1:
        raise ValueError("p must be >= 1")
    pm = p_max(z, n)
    if p > pm:
        raise POutOfRange(p, pm)
    side = 1 << n
    l_lo = max(0, sq.l - (p - 1))
    l_hi = min(side - 1, sq.l + (p - 1))
    m_lo = max(0, sq.m - (p - 1))
    m_hi = min(side - 1, sq.m + (p - 1))
    h = 2.0 ** -n
    inner = (p * h) ** 2
    outer_square_side = 2.0 * p * h
    outer_ball = 0.5 * math.pi * outer_square_side ** 2
    cert = ShrinkCertificate(inner_area=inner, outer_ball_area=outer_ball)
    return LRegion(sq, p, l_lo, l_hi, m_lo, m_hi, cert)
