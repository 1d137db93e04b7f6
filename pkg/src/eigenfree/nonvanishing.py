"""Non-vanishing partial-fraction functions anchored on a spectrum model.

Given the eigenvalue prefix (lambda_k) of a model F, this module chooses
interpolation nodes mu_k in F and coefficients c_k so that

    f_N(z) = prod_{i<=N} (z - mu_i) / (z - lam_i)
           = 1 - sum_{i<=N} c_{i,N} / (z - lam_i),

    c_{k,N} = -(lam_k - mu_k) * prod_{j<=N, j != k}
              (lam_k - mu_j) / (lam_k - lam_j).

The product form shows f_N has no zeros off F (every factor is nonzero
there), and the sum form is the resolvent expression the eigenvalue test
consumes.  Note the sign: writing the sum side as  sum c/(z-lam) - 1  with
c_{k,N} = +(lam_k - mu_k) * prod(...)  cannot match the product, whose
expansion is monic of degree N in the numerator while that sum side has
leading coefficient -1; the orientation above is the one that expands
correctly (the test suite pins this down coefficientwise).

Node constraints, with schedules eps_k (product of 1+eps_k finite) and
gamma_k (summable):

  (a) |lam_k - mu_k| <= eps_k * min_{j<k} |lam_j - lam_k|, so every later
      ratio satisfies |(lam_k - mu_j)/(lam_k - lam_j)| <= 1 + eps_j;
  (b) |K_k| <= gamma_k / prod_{i>k} (1 + eps_i), where
      K_k = (lam_k - mu_k) * prod_{j<k} (lam_k - mu_j)/(lam_k - lam_j),

which together give |c_k| <= gamma_k with strict headroom at any finite
table horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .errors import DegenerateLambda, PoleHit, SearchFailed
from .models import SpectrumModel, distance, set_points_near
from .util import trigamma

EPS_SCHEDULE_IDS = ("quadratic", "dyadic")
GAMMA_SCHEDULE_IDS = ("quadratic", "dyadic", "driven")

# prod_{k>=1} (1 + 1/(k+1)^2) = sinh(pi)/(2*pi)
_QUADRATIC_TOTAL = math.sinh(math.pi) / (2.0 * math.pi)

# Node search never accepts a radius this close to the float resolution of
# the anchor eigenvalue.
_RADIUS_FLOOR_ULPS = 8.0

# Local cap on |lam_k - mu_k| (keeps nodes near their anchors even when the
# schedules would allow more room).
_RADIUS_CAP = 0.05


@dataclass(frozen=True)
class EpsSchedule:
    """eps_k values plus the tail products prod_{i>k} (1 + eps_i)."""
    kind: str
    values: np.ndarray
    tails: np.ndarray  # tails[k] = prod_{i>k}(1+eps_i), k = 0..horizon

    @classmethod
    def make(cls, kind: str, count: int) -> "EpsSchedule":
        if kind not in EPS_SCHEDULE_IDS:
            raise ValueError(f"unknown eps schedule {kind!r}")
        k = np.arange(1, count + 1, dtype=np.float64)
        if kind == "quadratic":
            vals = 1.0 / (k + 1.0) ** 2
            prefix = np.concatenate([[1.0], np.cumprod(1.0 + vals)])
            tails = _QUADRATIC_TOTAL / prefix
        else:
            vals = 2.0 ** -k
            # beyond K the remaining factors are below double resolution
            kmax = max(count, 80)
            ext = 2.0 ** -np.arange(1, kmax + 1, dtype=np.float64)
            rev = np.cumprod((1.0 + ext)[::-1])[::-1]
            tails = np.concatenate([rev, [1.0]])[:count + 1]
        return cls(kind, vals, tails)


@dataclass(frozen=True)
class GammaSchedule:
    """gamma_k values plus a closed-form bound for the beyond-horizon tail."""
    kind: str
    values: np.ndarray
    beyond: float

    @classmethod
    def make(cls, kind: str, count: int,
             driven_values: np.ndarray | None = None,
             driven_beyond: float = 0.0) -> "GammaSchedule":
        if kind not in GAMMA_SCHEDULE_IDS:
            raise ValueError(f"unknown gamma schedule {kind!r}")
        if kind == "driven":
            if driven_values is None or len(driven_values) != count:
                raise ValueError("driven schedule needs one value per index")
            return cls(kind, np.asarray(driven_values, dtype=np.float64),
                       float(driven_beyond))
        k = np.arange(1, count + 1, dtype=np.float64)
        if kind == "quadratic":
            return cls(kind, 1.0 / (k + 1.0) ** 2, trigamma(count + 2.0))
        return cls(kind, 2.0 ** -k, 2.0 ** -float(count))

    def tail(self, k: int) -> float:
        """Upper bound for sum_{i>k} gamma_i (full infinite tail)."""
        if self.kind == "quadratic":
            return trigamma(k + 2.0)
        if self.kind == "dyadic":
            return 2.0 ** -float(k)
        return float(np.sum(self.values[k:])) + self.beyond


@dataclass
class CoefficientTable:
    """Nodes, schedules, head factors and coefficients up to a horizon."""
    model: SpectrumModel
    lambdas: np.ndarray
    eps: EpsSchedule
    gamma: GammaSchedule
    mus: np.ndarray
    heads: np.ndarray
    c_limit: np.ndarray
    filled: int = 0
    bound_ok: bool = False  # |c_limit| <= gamma verified at fill time
    _partial_cache: dict = field(default_factory=dict, repr=False)

    @property
    def horizon(self) -> int:
        return len(self.lambdas)

    def c_partial(self, N: int) -> np.ndarray:
        """Coefficients c_{k,N} of the N-term truncation, k <= N."""
        if not 1 <= N <= self.horizon:
            raise ValueError("N out of range")
        if N not in self._partial_cache:
            self._partial_cache[N] = coefficient_block(
                self.lambdas, self.mus, N, np.arange(1, N + 1))
        return self._partial_cache[N]

    def diff_sum(self, N: int) -> float:
        """sum_{k<=N} |c_limit(k) - c_{k,N}|."""
        if N == self.horizon:
            return 0.0
        return float(np.sum(np.abs(self.c_limit[:N] - self.c_partial(N))))

    def tails_at(self, k: int) -> float:
        """prod_{i>k} (1 + eps_i)."""
        return float(self.eps.tails[k])

    def to_json_dict(self) -> dict:
        return {
            "mus": [[z.real, z.imag] for z in self.mus],
            "eps": {"id": self.eps.kind, "values": self.eps.values.tolist()},
            "gammas": self.gamma.values.tolist(),
            "c": [[z.real, z.imag] for z in self.c_limit],
        }


def _check_distinct(lambdas: np.ndarray) -> None:
    order = np.lexsort((lambdas.imag, lambdas.real))
    srt = lambdas[order]
    eq = np.nonzero(srt[1:] == srt[:-1])[0]
    if len(eq):
        k = eq[0]
        i, j = int(order[k]) + 1, int(order[k + 1]) + 1
        raise DegenerateLambda(min(i, j), max(i, j))


def coefficient_block(lambdas: np.ndarray, mus: np.ndarray, N: int,
                      ks: np.ndarray) -> np.ndarray:
    """c_{k,N} for the given k, as products of near-unit ratios (no
    overflow for any horizon used here)."""
    out = np.empty(len(ks), dtype=np.complex128)
    lamN = lambdas[:N]
    muN = mus[:N]
    for idx, k in enumerate(ks):
        lk = lambdas[k - 1]
        num = lk - muN
        den = lk - lamN
        anchor = num[k - 1]
        num[k - 1] = 1.0
        den[k - 1] = 1.0
        out[idx] = -anchor * np.prod(num / den)
    return out


def new_table(model: SpectrumModel, lambdas: np.ndarray,
              eps: EpsSchedule, gamma: GammaSchedule) -> CoefficientTable:
    lambdas = np.ascontiguousarray(lambdas, dtype=np.complex128)
    _check_distinct(lambdas)
    n = len(lambdas)
    if len(eps.values) != n or len(gamma.values) != n:
        raise ValueError("schedule length must match the eigenvalue prefix")
    return CoefficientTable(
        model=model, lambdas=lambdas, eps=eps, gamma=gamma,
        mus=np.full(n, np.nan, dtype=np.complex128),
        heads=np.full(n, np.nan, dtype=np.complex128),
        c_limit=np.full(n, np.nan, dtype=np.complex128))


def choose_mu(model: SpectrumModel, lambdas: np.ndarray, k: int,
              table: CoefficientTable, probe_budget: int = 10_000,
              _lam_set: set | None = None,
              _mu_set: set | None = None) -> complex:
    """Pick node mu_k in the model's set satisfying constraints (a), (b).

    Probes set points spiralling toward lam_k at geometrically shrinking
    radii; fails (typed) when the required radius sits below float
    resolution or the budget runs out.
    """
    if k < 1 or k > table.horizon:
        raise ValueError("k out of range")
    if table.filled != k - 1:
        raise ValueError("nodes must be chosen in order")
    lam_k = complex(lambdas[k - 1])
    if _lam_set is None:
        _lam_set = set(map(complex, lambdas))
    if _mu_set is None:
        _mu_set = set(map(complex, table.mus[:k - 1]))

    if k > 1:
        gap = float(np.min(np.abs(lambdas[:k - 1] - lam_k)))
        head_prod = complex(np.prod(
            (lam_k - table.mus[:k - 1]) / (lam_k - lambdas[:k - 1])))
        ra = table.eps.values[k - 1] * gap
    else:
        head_prod = 1.0 + 0.0j
        ra = math.inf
    target_k = table.gamma.values[k - 1] / table.tails_at(k)
    rb = target_k / abs(head_prod)
    limit = min(ra, rb)
    r_star = 0.9 * min(limit, _RADIUS_CAP)
    floor = _RADIUS_FLOOR_ULPS * math.ulp(abs(lam_k) + 1.0)
    if r_star < floor:
        raise SearchFailed(
            k, f"required radius {r_star:.3e} below float resolution")

    for cand in set_points_near(model, lam_k, r_star, probe_budget):
        if cand in _lam_set or cand in _mu_set:
            continue
        d = abs(lam_k - cand)
        if not 0.0 < d <= limit:
            continue
        if abs((lam_k - cand) * head_prod) > target_k:
            continue
        return cand
    raise SearchFailed(k, "probe budget exhausted")


def coefficients(lambdas: np.ndarray, table: CoefficientTable,
                 N: int | None = None) -> CoefficientTable:
    """Fill head factors and limit coefficients (and prime the c_{k,N}
    cache for the working N)."""
    _check_distinct(table.lambdas)
    n = table.horizon
    if table.filled != n:
        raise ValueError("all nodes must be chosen before coefficients")
    for k in range(1, n + 1):
        lam_k = table.lambdas[k - 1]
        head = complex(np.prod(
            (lam_k - table.mus[:k - 1]) / (lam_k - table.lambdas[:k - 1])))
        table.heads[k - 1] = (lam_k - table.mus[k - 1]) * head
    table.c_limit = coefficient_block(
        table.lambdas, table.mus, n, np.arange(1, n + 1))
    table.bound_ok = bool(
        np.all(np.abs(table.c_limit) <= table.gamma.values)
        and np.all(np.abs(table.c_limit) > 0.0))
    table._partial_cache.clear()
    table._partial_cache[n] = table.c_limit
    if N is not None and N != n:
        table.c_partial(N)
    return table


def build_table(model: SpectrumModel, lambdas: np.ndarray,
                eps_kind: str = "quadratic",
                gamma: GammaSchedule | str = "quadratic",
                probe_budget: int = 10_000) -> CoefficientTable:
    """Choose all nodes in order and fill the coefficients."""
    lambdas = np.ascontiguousarray(lambdas, dtype=np.complex128)
    n = len(lambdas)
    eps = EpsSchedule.make(eps_kind, n)
    if isinstance(gamma, str):
        gamma = GammaSchedule.make(gamma, n)
    table = new_table(model, lambdas, eps, gamma)
    lam_set = set(map(complex, lambdas))
    mu_set: set = set()
    for k in range(1, n + 1):
        mu = choose_mu(model, lambdas, k, table, probe_budget,
                       _lam_set=lam_set, _mu_set=mu_set)
        table.mus[k - 1] = mu
        mu_set.add(mu)
        table.filled = k
    return coefficients(lambdas, table)


# ---------------------------------------------------------------------------
# evaluation


def _pole_check(lambdas: np.ndarray, zs: np.ndarray, N: int) -> None:
    for z in zs:
        hit = np.nonzero(lambdas[:N] == z)[0]
        if len(hit):
            raise PoleHit(int(hit[0]) + 1)


def eval_product_grid(lambdas, mus, zs, N: int) -> np.ndarray:
    """f_N over a vector of points, as the factor product."""
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    if N == 0:
        return np.ones(len(zs), dtype=np.complex128)
    _pole_check(lambdas, zs, N)
    return kernels.prod_eval(lambdas[:N], mus[:N], zs)


def eval_sum_grid(lambdas, c, zs, N: int) -> np.ndarray:
    """1 - sum_{i<=N} c_i/(z - lam_i) over a vector of points."""
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    if N == 0:
        return np.ones(len(zs), dtype=np.complex128)
    _pole_check(lambdas, zs, N)
    return kernels.pf_eval(lambdas[:N], c[:N], zs)


def eval_product(lambdas, mus, z: complex, N: int) -> complex:
    return complex(eval_product_grid(lambdas, mus, np.array([z]), N)[0])


def eval_sum(lambdas, c, z: complex, N: int) -> complex:
    return complex(eval_sum_grid(lambdas, c, np.array([z]), N)[0])


def tail_bound(table: CoefficientTable, N: int, dist_to_f: float) -> float:
    """Uniform bound for |f - f_N| on a compact at the given distance:
    (sum_{k<=N} |c_k - c_{k,N}| + sum_{i>N} gamma_i) / dist."""
    if dist_to_f <= 0.0:
        raise ValueError("distance must be positive")
    return (table.diff_sum(N) + table.gamma.tail(N)) / dist_to_f


@dataclass(frozen=True)
class CertificateRow:
    z: complex
    abs_f: float
    bound: float

    @property
    def margin(self) -> float:
        return self.abs_f - self.bound


@dataclass(frozen=True)
class CertificateReport:
    rows: tuple
    min_factor_abs: float

    @property
    def passed(self) -> bool:
        return all(r.margin > 0.0 for r in self.rows)

    def to_csv_rows(self):
        for r in self.rows:
            yield (r.z.real, r.z.imag, r.abs_f, r.bound, r.margin)


def nonvanishing_certificate(table: CoefficientTable, grid,
                             N: int | None = None) -> CertificateReport:
    """Check |f_N| > tail bound pointwise on a grid off the set.

    Failures are recorded per point, not raised; points are expected to
    have positive distance from the model's set.
    """
    N = table.horizon if N is None else N
    zs = np.ascontiguousarray(grid, dtype=np.complex128)
    dists = np.array([distance(table.model, complex(z)) for z in zs])
    if np.any(dists <= 0.0):
        raise ValueError("certificate grid touches the set")
    vals = eval_product_grid(table.lambdas, table.mus, zs, N)
    diff = table.diff_sum(N)
    gtail = table.gamma.tail(N)
    rows = tuple(
        CertificateRow(complex(z), float(abs(v)), (diff + gtail) / float(d))
        for z, v, d in zip(zs, vals, dists))
    min_factor = math.inf
    for z in zs:
        min_factor = min(min_factor,
                         float(np.min(np.abs(z - table.mus[:N]))))
    return CertificateReport(rows=rows, min_factor_abs=min_factor)
