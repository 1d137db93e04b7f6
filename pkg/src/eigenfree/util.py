"""Small shared helpers: finiteness checks, line fits, float formatting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# One-sided 95% Student quantiles by degrees of freedom; beyond the table the
# normal quantile is close enough.
_T95 = {
    1: 6.314, 2: 2.920, 3: 2.353, 4: 2.132, 5: 2.015, 6: 1.943, 7: 1.895,
    8: 1.860, 9: 1.833, 10: 1.812, 11: 1.796, 12: 1.782, 13: 1.771,
    14: 1.761, 15: 1.753, 16: 1.746, 17: 1.740, 18: 1.734, 19: 1.729,
    20: 1.725, 25: 1.708, 30: 1.697,
}


def t95(df: int) -> float:
    if df <= 0:
        return math.inf
    if df in _T95:
        return _T95[df]
    if df < 25:
        return _T95[20]
    if df < 30:
        return _T95[25]
    return 1.645


def require_finite(z: complex, what: str = "value") -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{what} must be finite, got {z}")
    return z


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_stderr: float
    n: int

    @property
    def slope_positive_95(self) -> bool:
        """Is the slope positive at one-sided 95% confidence?"""
        if self.n < 3:
            return self.slope > 0
        if self.slope_stderr == 0.0:
            return self.slope > 0
        return self.slope > t95(self.n - 2) * self.slope_stderr


def fit_line(x, y) -> LineFit:
    """Least-squares line fit with the classical slope standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two points to fit a line")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate abscissae")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    if n > 2:
        resid = y - (intercept + slope * x)
        s2 = float(np.sum(resid ** 2)) / (n - 2)
        stderr = math.sqrt(s2 / sxx)
    else:
        stderr = 0.0
    return LineFit(slope, intercept, stderr, n)


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def trigamma(x: float) -> float:
    """sum_{n>=0} 1/(x+n)^2 for x > 0, via recurrence plus the asymptotic
    series (no cancellation, ~1e-16 relative)."""
    if x <= 0:
        raise ValueError("trigamma requires x > 0")
    acc = 0.0
    while x < 20.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    # 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)
    s = inv + 0.5 * inv2 + inv * inv2 * (
        1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 - inv2 / 30.0)))
    return acc + s


def min_pairwise_gap(points: np.ndarray, chunk: int = 1024) -> tuple[float, tuple[int, int]]:
    """Smallest |p_i - p_j| over i < j for a complex array, with its argmin.

    Chunked O(n^2); adequate for the horizons used here.
    """
    n = len(points)
    if n < 2:
        return math.inf, (-1, -1)
    best = math.inf
    pair = (-1, -1)
    for a in range(0, n, chunk):
        block = points[a:a + chunk]
        # within-block upper triangle
        d = np.abs(block[:, None] - block[None, :])
        np.fill_diagonal(d, np.inf)
        k = int(np.argmin(d))
        i, j = divmod(k, d.shape[1])
        if d[i, j] < best:
            best = float(d[i, j])
            pair = (a + min(i, j), a + max(i, j))
        # block against everything after it
        rest = points[a + chunk:]
        if len(rest):
            d2 = np.abs(block[:, None] - rest[None, :])
            k = int(np.argmin(d2))
            i, j = divmod(k, d2.shape[1])
            if d2[i, j] < best:
                best = float(d2[i, j])
                pair = (a + i, a + chunk + j)
    return best, pair
