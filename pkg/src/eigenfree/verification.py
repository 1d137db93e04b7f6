"""Numerical checks shared by the CLI verify command and the test suite.

Every check returns a CheckResult with the measured quantity and its
threshold, so reports stay comparable across runs.  Randomized instance
generators are seeded and deterministic.

Two independent oracles guard the algebra here:

  * polynomial expansion: prod(z - lam_i) - sum_i c_i prod_{j!=i}(z - lam_j)
    is expanded coefficientwise and compared against prod(z - mu_i); the
    same machinery expands det(zI - A) for small dense sections.  These
    paths share nothing with the kernel evaluators or the LAPACK solver
    they certify.
  * direct enumeration of covering balls against the closed-form stage
    budgets and hit counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .models import (SpectrumModel, cover_budget, cover_hits,
                     cover_stage_diam_sq, distance, lambda_block)
from .nonvanishing import (CoefficientTable, coefficient_block,
                           eval_product_grid, eval_sum_grid, tail_bound)
from .perturbation import (PerturbationBundle, Branch, ionascu_grid,
                           match_to_targets, rank_one_section,
                           secular_eigenvalues)
from .range_avoidance import (SelectionPlan, WeightedVector,
                              divergence_diagnostic, resolvent_energy)
from .util import fit_line


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: dict
    threshold: str
    runtime: float

    def to_json_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed,
                "measured": self.measured, "threshold": self.threshold,
                "runtime": self.runtime}


def _finish(name, passed, measured, threshold, t0) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), measured=measured,
                       threshold=threshold,
                       runtime=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# polynomial oracle (independent of the kernels and the eigensolver)


def poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def poly_from_roots(roots) -> np.ndarray:
    """Monic polynomial with the given roots, ascending coefficients."""
    p = np.array([1.0 + 0.0j])
    for r in roots:
        p = poly_mul(p, np.array([-r, 1.0 + 0.0j]))
    return p


def secular_poly(lambdas, c) -> np.ndarray:
    """Expansion of prod(z-lam_i) * (1 - sum_i c_i/(z-lam_i))."""
    n = len(lambdas)
    total = poly_from_roots(lambdas)
    for i in range(n):
        others = poly_from_roots(np.delete(np.asarray(lambdas), i))
        total = total - c[i] * np.pad(others, (0, len(total) - len(others)))
    return total


def char_poly(a: np.ndarray) -> np.ndarray:
    """det(zI - a) by Laplace expansion over polynomial entries.

    Factorial cost; intended for sections of size <= 7.
    """
    n = a.shape[0]
    entries = [[np.array([-a[i, j], 1.0 + 0.0j]) if i == j
                else np.array([-a[i, j]]) for j in range(n)]
               for i in range(n)]

    def det(rows, cols):
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        acc = np.zeros(1, dtype=np.complex128)
        for t, cj in enumerate(cols):
            minor = det(rows[1:], cols[:t] + cols[t + 1:])
            term = poly_mul(entries[rows[0]][cj], minor)
            if t % 2:
                term = -term
            width = max(len(acc), len(term))
            acc = (np.pad(acc, (0, width - len(acc)))
                   + np.pad(term, (0, width - len(term))))
        return acc

    return det(list(range(n)), list(range(n)))


def coeffwise_rel_err(p: np.ndarray, q: np.ndarray) -> float:
    width = max(len(p), len(q))
    p = np.pad(p, (0, width - len(p)))
    q = np.pad(q, (0, width - len(q)))
    scale = np.maximum(np.abs(q), 1.0)
    return float(np.max(np.abs(p - q) / scale))


# ---------------------------------------------------------------------------
# seeded instance generators


def sample_nodes(rng: np.random.Generator, count: int,
                 min_gap: float) -> np.ndarray:
    """Points in [0,1]^2 with pairwise gaps >= min_gap (rejection)."""
    out = []
    while len(out) < count:
        z = complex(rng.uniform(0, 1), rng.uniform(0, 1))
        if all(abs(z - w) >= min_gap for w in out):
            out.append(z)
    return np.array(out, dtype=np.complex128)


def sample_pole_node_instance(rng: np.random.Generator, n: int,
                              pole_gap: float = 2e-2,
                              offset_lo: float = 1e-3,
                              offset_hi: float = 5e-3):
    """Poles with pairwise gaps, nodes displaced by a small random offset
    (keeps the rank-one sections well conditioned at every size used)."""
    lam = sample_nodes(rng, n, pole_gap)
    r = rng.uniform(offset_lo, offset_hi, n)
    th = rng.uniform(0.0, 2.0 * math.pi, n)
    mus = lam + r * np.exp(1j * th)
    return lam, mus


# ---------------------------------------------------------------------------
# criterion checks


def check_partial_fraction_identity(instances: int = 200, max_n: int = 12,
                                    z_count: int = 100, seed: int = 2024,
                                    tol: float = 1e-10) -> CheckResult:
    """Product and partial-fraction forms agree pointwise."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        pts = sample_nodes(rng, 2 * n, 1e-3)
        lam, mus = pts[:n], pts[n:]
        c = coefficient_block(lam, mus, n, np.arange(1, n + 1))
        zs = []
        while len(zs) < z_count:
            z = complex(rng.uniform(-1, 2), rng.uniform(-1, 2))
            if np.min(np.abs(z - lam)) >= 1e-2:
                zs.append(z)
        zs = np.array(zs)
        p = eval_product_grid(lam, mus, zs, n)
        s = eval_sum_grid(lam, c, zs, n)
        rel = np.max(np.abs(p - s) / (1.0 + np.abs(p)))
        worst = max(worst, float(rel))
    return _finish("partial_fraction_identity", worst <= tol,
                   {"max_rel_err": worst, "instances": instances},
                   f"max_rel_err <= {tol}", t0)


def check_sign_repair(seed: int = 7, tol: float = 1e-9) -> CheckResult:
    """The adopted coefficient orientation expands to prod(z - mu); the
    opposite orientation misses the leading coefficient by 2.

    With c_k = -(lam_k - mu_k) prod(...) the expansion
    prod(z-lam) - sum c_i prod_{j!=i}(z-lam_j) equals prod(z-mu).  Flipping
    the sign (c' = -c) and matching  sum c'_i prod_{j!=i}(z-lam_j) -
    prod(z-lam)  against prod(z-mu) pits leading coefficient -1 against +1.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_repaired = 0.0
    worst_unrepaired_gap = math.inf
    for n in (1, 2, 3, 4):
        for _ in range(8):
            pts = sample_nodes(rng, 2 * n, 1e-2)
            lam, mus = pts[:n], pts[n:]
            c = coefficient_block(lam, mus, n, np.arange(1, n + 1))
            target = poly_from_roots(mus)
            repaired = secular_poly(lam, c)
            worst_repaired = max(worst_repaired,
                                 coeffwise_rel_err(repaired, target))
            # sum (-c)_i prod_{j!=i}(z-lam_j) - prod(z-lam)
            #   = secular_poly(lam, c) - 2 prod(z-lam)
            opposite = secular_poly(lam, c) - 2.0 * poly_from_roots(lam)
            gap = abs(opposite[-1] - target[-1])
            worst_unrepaired_gap = min(worst_unrepaired_gap, float(gap))
    passed = worst_repaired <= tol and worst_unrepaired_gap >= 1.0
    return _finish("sign_repair_oracle", passed,
                   {"repaired_max_rel_err": worst_repaired,
                    "unrepaired_leading_gap": worst_unrepaired_gap},
                   f"repaired <= {tol}; unrepaired leading gap >= 1", t0)


def check_secular_oracle(sizes=(2, 4, 8, 16, 32, 64), instances: int = 50,
                         seed: int = 11) -> CheckResult:
    """Dense solver eigenvalues of diag + u v^* match the nodes."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = {n: 0.0 for n in sizes}
    for k in range(instances):
        n = sizes[k % len(sizes)]
        lam, mus = sample_pole_node_instance(rng, n)
        c = coefficient_block(lam, mus, n, np.arange(1, n + 1))
        u = np.ones(n, dtype=np.complex128)
        v = np.conj(c) / np.conj(u)
        a = rank_one_section(lam, u, v, n)
        eig = np.linalg.eigvals(a)
        _, err = match_to_targets(eig, mus)
        worst[n] = max(worst[n], err)
    tol_small, tol_big = 1e-8, 1e-6
    passed = all(err <= (tol_small if n <= 16 else tol_big)
                 for n, err in worst.items())
    return _finish("secular_eigenvalue_oracle", passed,
                   {f"max_err_n{n}": err for n, err in worst.items()},
                   "err <= 1e-8 (n<=16), <= 1e-6 (n=64)", t0)


def check_determinant_identity(seed: int = 13, tol: float = 1e-9,
                               instances: int = 12) -> CheckResult:
    """Expanded char poly of the section equals prod(z - mu) (N <= 6)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(instances):
        n = 2 + k % 5  # 2..6
        lam, mus = sample_pole_node_instance(rng, n)
        c = coefficient_block(lam, mus, n, np.arange(1, n + 1))
        u = np.ones(n, dtype=np.complex128)
        v = np.conj(c)
        a = rank_one_section(lam, u, v, n)
        worst = max(worst, coeffwise_rel_err(char_poly(a),
                                             poly_from_roots(mus)))
    return _finish("determinant_identity", worst <= tol,
                   {"max_rel_err": worst}, f"coeffwise <= {tol}", t0)


def check_coefficient_bounds(tables) -> CheckResult:
    """|c_k| <= gamma_k and c_k != 0 on every supplied table."""
    t0 = time.perf_counter()
    worst_ratio, min_abs = 0.0, math.inf
    for _, table in tables:
        ratio = np.abs(table.c_limit) / table.gamma.values
        worst_ratio = max(worst_ratio, float(np.max(ratio)))
        min_abs = min(min_abs, float(np.min(np.abs(table.c_limit))))
    passed = worst_ratio <= 1.0 and min_abs > 0.0
    return _finish("coefficient_bounds", passed,
                   {"max_abs_c_over_gamma": worst_ratio,
                    "min_abs_c": min_abs},
                   "|c| <= gamma and |c| > 0", t0)


def check_cover_budget(model: SpectrumModel, stages: int, sample_points,
                       min_multiplicity: int,
                       budget_cap: float | None = None) -> CheckResult:
    """Prefix diam^2 total under budget; sampled points covered in nearly
    every stage."""
    t0 = time.perf_counter()
    total = sum(cover_stage_diam_sq(model, n) for n in range(1, stages + 1))
    budget = cover_budget(model) if budget_cap is None else budget_cap
    mults = []
    for z in sample_points:
        mults.append(sum(1 for n in range(1, stages + 1)
                         if cover_hits(model, z, n) >= 1))
    passed = total <= budget and min(mults) >= min_multiplicity
    return _finish(f"cover_budget_{model.kind}", passed,
                   {"diam_sq_total": total, "budget": budget,
                    "min_multiplicity": int(min(mults)), "stages": stages},
                   f"total <= {budget:.4g}; multiplicity >= "
                   f"{min_multiplicity}", t0)


def check_density_slopes(plan: SelectionPlan, u: WeightedVector,
                         points, stages) -> CheckResult:
    """Positive growth of the stagewise energy at density-one points.

    Near-hits only ever push single stage values up, so the family's lower
    envelope (stagewise minimum over the sample points) is the spike-free
    object; its fitted slope must clear zero at 95%.  Every individual
    point must additionally show a positive envelope slope.
    """
    t0 = time.perf_counter()
    stages = list(stages)
    slopes, values = [], []
    for z in points:
        rep = divergence_diagnostic(plan, u, z, stages=stages)
        slopes.append(rep.fit.slope)
        values.append(rep.values)
    family_env = np.min(np.array(values), axis=0)
    family_fit = fit_line(stages, family_env)
    ok = family_fit.slope_positive_95 and min(slopes) > 0.0
    return _finish("divergence_density_slope", ok,
                   {"family_slope": family_fit.slope,
                    "family_slope_stderr": family_fit.slope_stderr,
                    "min_point_slope": float(min(slopes)),
                    "points": len(slopes)},
                   "family envelope slope > 0 at 95%; "
                   "every point slope > 0", t0)


def check_exceptional_units(plan: SelectionPlan, u: WeightedVector,
                            points, total_stages: int,
                            slack: int = 2) -> CheckResult:
    """Unit contributions within the first `total_stages` covering stages."""
    t0 = time.perf_counter()
    counts, per_ball = [], True
    for z in points:
        rep = divergence_diagnostic(plan, u, z,
                                    stages=list(range(1, total_stages + 1)))
        counts.append(rep.unit_total)
        per_ball = per_ball and rep.per_ball_ok
    need = total_stages - slack
    passed = min(counts) >= need and per_ball
    return _finish("divergence_exceptional_units", passed,
                   {"min_units": int(min(counts)),
                    "required": need, "stages": total_stages,
                    "per_ball_ok": per_ball},
                   f"units >= {need} in {total_stages} covering stages", t0)


def check_outside_bound(u: WeightedVector, model: SpectrumModel, points,
                        slack: float = 1e-9) -> CheckResult:
    """Termwise bound: energy at distance d never exceeds ||u||^2/d^2."""
    t0 = time.perf_counter()
    horizon = int(u.indices[-1])
    worst = 0.0
    for z in points:
        d = distance(model, z)
        s = resolvent_energy(u, model, z, horizon)
        worst = max(worst, s * d * d / u.norm_sq)
    return _finish("resolvent_outside_bound", worst <= 1.0 + slack,
                   {"max_normalized_energy": worst, "points": len(points)},
                   "S * d^2 / ||u||^2 <= 1", t0)


def check_bundle_invariants(bundle: PerturbationBundle) -> CheckResult:
    """The three bundle identities, plus nonvanishing of every entry."""
    t0 = time.perf_counter()
    v_exact = np.array_equal(
        bundle.v.values, np.conj(bundle.c) / np.conj(bundle.u.values))
    budget_ok = bool(np.all(np.abs(bundle.c)
                            <= bundle.delta * np.abs(bundle.u.values) ** 2))
    nonzero = bool(np.all(bundle.u.values != 0)
                   and np.all(bundle.v.values != 0)
                   and np.all(np.abs(bundle.c) > 0))
    norm_ok = (bundle.v_norm <= bundle.delta * bundle.u_norm * (1 + 1e-12)
               and bundle.rank_one_norm
               <= bundle.delta * bundle.u.norm_sq * (1 + 1e-12))
    passed = v_exact and budget_ok and nonzero and norm_ok
    return _finish("bundle_invariants", passed,
                   {"v_formula_exact": v_exact, "c_budget_ok": budget_ok,
                    "entries_nonzero": nonzero,
                    "uv_norm": bundle.rank_one_norm,
                    "delta_u_sq": bundle.delta * bundle.u.norm_sq},
                   "v = conj(c)/conj(u); |c| <= delta|u|^2; "
                   "||u||||v|| <= delta||u||^2", t0)


def rectangle_grid(x0, x1, y0, y1, nx, ny) -> np.ndarray:
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def outside_points(model: SpectrumModel, count: int, min_dist: float,
                   span: float = 0.6, res: int = 115) -> np.ndarray:
    """First `count` grid points at distance >= min_dist, row-major."""
    grid = rectangle_grid(-span, 1 + span, -span, 1 + span, res, res)
    keep = np.array([distance(model, complex(z)) >= min_dist for z in grid])
    pts = grid[keep]
    if len(pts) < count:
        raise ValueError("grid too small for the requested point count")
    return pts[:count]


def in_set_points(model: SpectrumModel, horizon: int,
                  count: int) -> np.ndarray:
    """Set members that are not bundle eigenvalues: enumeration points
    beyond the horizon."""
    return np.array(lambda_block(model, horizon + count)[horizon:])


def density_one_samples(model: SpectrumModel, count: int) -> np.ndarray:
    """Interior points of the square off every dyadic grid line."""
    if model.kind != "unit_square":
        raise ValueError("density-one points need positive area")
    t = np.arange(1, count + 1, dtype=np.float64)
    return ((t * math.sqrt(5.0)) % 1.0
            + 1j * ((t * math.sqrt(7.0)) % 1.0))


def exceptional_samples(model: SpectrumModel, count: int) -> np.ndarray:
    """Deterministic exceptional-set members: grid-line points for the
    square, plain set members elsewhere (measure-zero sets are wholly
    exceptional)."""
    if model.kind != "unit_square":
        return in_set_points(model, 0, count)
    xs = (0.5, 0.25, 0.75)
    pts = []
    t = 1
    while len(pts) < count:
        line = xs[t % 3]
        frac = (t * math.sqrt(5.0)) % 1.0
        pts.append(complex(line, frac) if t % 2 else complex(frac, line))
        t += 1
    return np.array(pts, dtype=np.complex128)


def mixed_grid(bundle: PerturbationBundle, n_exact: int = 100,
               n_inset: int = 1000, n_outside: int = 8900,
               min_dist: float = 0.1):
    """The verdict grid: exact eigenvalues, in-set samples, outside ring."""
    exact = np.array(bundle.lambdas[:n_exact])
    inset = in_set_points(bundle.model, bundle.horizon, n_inset)
    outside = outside_points(bundle.model, n_outside, min_dist)
    return exact, inset, outside


def check_ionascu_grid(bundle: PerturbationBundle, n_exact: int = 100,
                       n_inset: int = 1000, n_outside: int = 8900,
                       min_dist: float = 0.1
                       ) -> tuple[CheckResult, list]:
    """Every grid point gets a definite branch; outside margins positive."""
    t0 = time.perf_counter()
    exact, inset, outside = mixed_grid(bundle, n_exact, n_inset, n_outside,
                                       min_dist)
    zs = np.concatenate([exact, inset, outside])
    verdicts = ionascu_grid(bundle, zs)
    counts = {b.value: 0 for b in Branch}
    for v in verdicts:
        counts[v.branch.value] += 1
    margins = [v.data["margin"] for v in verdicts
               if v.branch is Branch.SUM_NOT_ONE]
    n_inc = counts[Branch.INCONCLUSIVE.value]
    min_margin = float(min(margins)) if margins else math.nan
    passed = (n_inc == 0 and len(margins) >= n_outside
              and min_margin > 0.0)
    result = _finish("ionascu_grid", passed,
                     {"counts": counts, "min_outside_margin": min_margin,
                      "grid_size": len(zs)},
                     "no inconclusive verdicts; outside margins > 0", t0)
    return result, verdicts


def check_tail_convergence(table: CoefficientTable, hs=(8, 16, 32, 64),
                           grid=None) -> CheckResult:
    """|f_2H - f_H| below the tail bound at H; bounds shrink with H."""
    t0 = time.perf_counter()
    if grid is None:
        # stays clear of every shipped model (all live in |z - 0.5| < 1.4)
        theta = 2.0 * math.pi * np.arange(100) / 100.0
        grid = 0.5 + 2.0 * np.exp(1j * theta)
    grid = np.asarray(grid, dtype=np.complex128)
    dist_l = min(distance(table.model, complex(z)) for z in grid)
    rows = []
    ok = True
    prev_bound = math.inf
    for h in hs:
        f_h = eval_product_grid(table.lambdas, table.mus, grid, h)
        f_2h = eval_product_grid(table.lambdas, table.mus, grid, 2 * h)
        sup = float(np.max(np.abs(f_2h - f_h)))
        bound = tail_bound(table, h, dist_l)
        rows.append((h, sup, bound))
        ok = ok and sup <= bound and bound < prev_bound
        prev_bound = bound
    return _finish("tail_bound_convergence", ok,
                   {f"H{h}": {"sup_diff": s, "bound": b}
                    for h, s, b in rows},
                   "sup|f_2H - f_H| <= bound(H), bounds decreasing", t0)
