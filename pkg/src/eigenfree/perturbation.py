"""Bundle assembly and the point-spectrum test for D + u (x) v.

A bundle couples the avoidance vector u with coefficients c_i satisfying
0 < |c_i| <= delta |u_i|^2 and the conjugate-quotient vector
v_i = conj(c_i)/conj(u_i), so that u_i * conj(v_i) = c_i and

    ||v||^2 = sum |c_i|^2/|u_i|^2 <= delta^2 ||u||^2,

hence ||u (x) v|| = ||u|| ||v|| <= delta ||u||^2.

Given the bundle, a point z is screened by the classical rank-one
eigenvalue criterion (Ionascu): z is an eigenvalue of D + u (x) v exactly
when z avoids the diagonal's eigenvalues, the energy
sum |u_i|^2/|z-lambda_i|^2 converges, and sum c_i/(z-lambda_i) = 1.  The
finite verdicts certify, per branch: an eigenvalue match (1), stagewise
divergence growth (2), or |1 - sum c_i/(z-lambda_i)| exceeding the tail
bound (3).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .errors import GammaMismatch, SolverFailure, ZeroUEntry
from .models import (DensityClass, SpectrumModel, cover_budget,
                     density_class, distance, lambda_block)
from .nonvanishing import CoefficientTable, GammaSchedule, build_table
from .range_avoidance import (SelectionPlan, WeightedVector, assemble_u,
                              build_selection, divergence_diagnostic,
                              leftover_tail, stage_weight_tail)

MATCH_TOL = 1e-12  # |z - lambda_i| below this is branch-1


@dataclass(frozen=True)
class IonascuProbe:
    """Budgets for the test: eigenvalue match tolerance and the stage
    window of the divergence diagnostics (None: plan-derived defaults)."""
    match_tol: float = MATCH_TOL
    density_stages: tuple | None = None
    cover_stages: tuple | None = None


class Branch(enum.Enum):
    EIGENVALUE_OF_D = "condition1_eigenvalue_of_diagonal"
    DIVERGENCE_CERTIFIED = "condition2_divergence_certified"
    SUM_NOT_ONE = "condition3_sum_not_one"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class IonascuVerdict:
    z: complex
    branch: Branch
    data: dict

    def to_json_dict(self) -> dict:
        return {"z": [self.z.real, self.z.imag],
                "branch": self.branch.value,
                "data": self.data}


@dataclass(frozen=True)
class PerturbationBundle:
    model: SpectrumModel
    horizon: int
    max_stage: int
    delta: float
    lambdas: np.ndarray
    u: WeightedVector
    c: np.ndarray
    v: WeightedVector
    mus: np.ndarray
    plan: SelectionPlan
    table: CoefficientTable
    tail_gamma_beyond: float

    @property
    def u_norm(self) -> float:
        return self.u.norm

    @property
    def v_norm(self) -> float:
        return self.v.norm

    @property
    def rank_one_norm(self) -> float:
        return self.u.norm * self.v.norm

    def tail_bound_at(self, z: complex) -> float:
        """Bound for |f - f_N| at z: the coefficients beyond the horizon
        are unknown but gamma-bounded, and the stored c equal their own
        horizon truncation, so only the gamma tail contributes."""
        d = distance(self.model, z)
        if d <= 0.0:
            raise ValueError("tail bound needs a point off the set")
        return self.tail_gamma_beyond / d


def driven_gamma(plan: SelectionPlan, u: WeightedVector,
                 delta: float) -> GammaSchedule:
    """Coefficient budgets gamma_i = delta |u_i|^2 with the closed-form
    beyond-horizon tail (leftover, stage-weight and covering tails)."""
    if not np.array_equal(u.indices,
                          np.arange(1, plan.horizon + 1, dtype=np.int64)):
        missing = np.setdiff1d(np.arange(1, plan.horizon + 1), u.indices)
        raise ZeroUEntry(int(missing[0]))
    values = delta * np.abs(u.values) ** 2
    processed = sum((2.0 * r.ball.radius) ** 2 for r in plan.stages)
    cover_rest = max(0.0, cover_budget(plan.model) - processed)
    beyond = delta * (leftover_tail(plan.horizon)
                      + stage_weight_tail(plan.max_stage) + cover_rest)
    return GammaSchedule.make("driven", plan.horizon,
                              driven_values=values, driven_beyond=beyond)


def assemble_bundle(model: SpectrumModel, plan: SelectionPlan,
                    u: WeightedVector, table: CoefficientTable,
                    delta: float) -> PerturbationBundle:
    """Check the coefficient budgets and build v_i = conj(c_i)/conj(u_i)."""
    horizon = plan.horizon
    if not np.array_equal(u.indices,
                          np.arange(1, horizon + 1, dtype=np.int64)):
        missing = np.setdiff1d(np.arange(1, horizon + 1), u.indices)
        raise ZeroUEntry(int(missing[0]))
    c = table.c_limit
    budget = delta * np.abs(u.values) ** 2
    bad = np.nonzero(np.abs(c) > budget)[0]
    if len(bad):
        i = int(bad[0])
        raise GammaMismatch(i + 1, float(abs(c[i])), float(budget[i]))
    v_vals = np.conj(c) / np.conj(u.values)
    v = WeightedVector.from_entries(u.indices.copy(), v_vals)
    return PerturbationBundle(
        model=model, horizon=horizon, max_stage=plan.max_stage,
        delta=delta, lambdas=table.lambdas, u=u, c=c, v=v, mus=table.mus,
        plan=plan, table=table, tail_gamma_beyond=table.gamma.tail(horizon))


def construct_bundle(model: SpectrumModel, max_stage: int, horizon: int,
                     delta: float = 1e-3, eps_kind: str = "quadratic",
                     probe_budget: int = 10_000) -> PerturbationBundle:
    """End-to-end construction: selection, u, coefficient table, v."""
    plan = build_selection(model, max_stage, horizon)
    u = assemble_u(plan)
    gamma = driven_gamma(plan, u, delta)
    table = build_table(model, lambda_block(model, horizon), eps_kind,
                        gamma, probe_budget)
    return assemble_bundle(model, plan, u, table, delta)


# ---------------------------------------------------------------------------
# the eigenvalue test


def _condition2_verdict(bundle: PerturbationBundle, z: complex,
                        dc: DensityClass,
                        probe: IonascuProbe) -> IonascuVerdict:
    if dc is DensityClass.DENSITY_ONE:
        if probe.density_stages is not None:
            stages = list(probe.density_stages)
        else:
            hi = bundle.plan.max_stage
            stages = list(range(min(4, max(hi - 1, 0)), hi + 1))
        rep = divergence_diagnostic(bundle.plan, bundle.u, z, stages=stages)
        ok = rep.fit.slope > 0.0
        data = {"kind": rep.kind, "slope": rep.fit.slope,
                "slope_stderr": rep.fit.slope_stderr,
                "stages": [int(s) for s in rep.stages]}
    else:
        processed = bundle.plan.processed_cover_stages()
        if probe.cover_stages is not None:
            stages = list(probe.cover_stages)
        else:
            stages = list(range(1, processed + 1))
        rep = divergence_diagnostic(bundle.plan, bundle.u, z, stages=stages)
        need = max(1, processed // 2)
        ok = rep.unit_total >= need and rep.per_ball_ok
        data = {"kind": rep.kind, "unit_total": rep.unit_total,
                "processed_stages": rep.processed_stages,
                "covered_stages": rep.covered_stages,
                "per_ball_ok": rep.per_ball_ok}
    branch = Branch.DIVERGENCE_CERTIFIED if ok else Branch.INCONCLUSIVE
    return IonascuVerdict(z=z, branch=branch, data=data)


def ionascu_grid(bundle: PerturbationBundle, zs,
                 probe: IonascuProbe | None = None) -> list[IonascuVerdict]:
    """Screen a batch of points; kernel evaluation is batched over the
    off-spectrum subset."""
    probe = probe or IonascuProbe()
    zs = np.ascontiguousarray(zs, dtype=np.complex128)
    lam = bundle.lambdas
    n = len(zs)
    nearest = np.empty(n)
    nearest_idx = np.empty(n, dtype=np.int64)
    chunk = 512
    for a in range(0, n, chunk):
        d = np.abs(zs[a:a + chunk, None] - lam[None, :])
        nearest[a:a + chunk] = d.min(axis=1)
        nearest_idx[a:a + chunk] = d.argmin(axis=1)

    verdicts: list[IonascuVerdict | None] = [None] * n
    outside_pos, outside_z = [], []
    for i, z in enumerate(zs):
        z = complex(z)
        if nearest[i] <= probe.match_tol:
            verdicts[i] = IonascuVerdict(
                z=z, branch=Branch.EIGENVALUE_OF_D,
                data={"index": int(nearest_idx[i]) + 1,
                      "distance": float(nearest[i])})
            continue
        dc = density_class(bundle.model, z)
        if dc is not DensityClass.OUTSIDE:
            verdicts[i] = _condition2_verdict(bundle, z, dc, probe)
        else:
            outside_pos.append(i)
            outside_z.append(z)

    if outside_pos:
        zo = np.array(outside_z, dtype=np.complex128)
        vals = kernels.pf_eval(lam, bundle.c, zo)
        for i, z, f in zip(outside_pos, outside_z, vals):
            bound = bundle.tail_bound_at(z)
            margin = abs(f) - bound
            branch = Branch.SUM_NOT_ONE if margin > 0.0 else Branch.INCONCLUSIVE
            verdicts[i] = IonascuVerdict(
                z=z, branch=branch,
                data={"abs_f": float(abs(f)), "tail_bound": float(bound),
                      "margin": float(margin),
                      "distance": float(distance(bundle.model, z))})
    return verdicts


def ionascu_test(bundle: PerturbationBundle, model: SpectrumModel,
                 z: complex,
                 probe: IonascuProbe | None = None) -> IonascuVerdict:
    """Single-point verdict; `model` must match the bundle's model."""
    if model != bundle.model:
        raise ValueError("model does not match the bundle")
    return ionascu_grid(bundle, np.array([z]), probe)[0]


# ---------------------------------------------------------------------------
# finite sections


def rank_one_section(lambdas, u_vals, v_vals, N: int) -> np.ndarray:
    """Dense N x N section diag(lambda) + u v^*  (entry ij = u_i conj(v_j))."""
    if N < 1 or N > len(lambdas):
        raise ValueError("N out of range")
    return (np.diag(lambdas[:N])
            + np.outer(u_vals[:N], np.conj(v_vals[:N])))


def truncate_matrix(bundle: PerturbationBundle, N: int) -> np.ndarray:
    return rank_one_section(bundle.lambdas, bundle.u.values,
                            bundle.v.values, N)


def secular_eigenvalues(bundle: PerturbationBundle, N: int,
                        use_partial_coeffs: bool = True) -> np.ndarray:
    """Eigenvalues of the N x N section.

    With coefficients of the N-term truncation (v rebuilt from c_{.,N}) the
    section's characteristic polynomial is exactly prod (z - mu_i), so the
    solver output should match the nodes; with the limit coefficients the
    match degrades by the tail bound.
    """
    if use_partial_coeffs:
        c_n = bundle.table.c_partial(N)
        v_vals = np.conj(c_n) / np.conj(bundle.u.values[:N])
    else:
        v_vals = bundle.v.values[:N]
    a = rank_one_section(bundle.lambdas, bundle.u.values, v_vals, N)
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(str(exc)) from exc


def match_to_targets(values: np.ndarray, targets: np.ndarray
                     ) -> tuple[np.ndarray, float]:
    """Greedy nearest-pair matching; returns (permutation, max error)
    with values[perm[k]] matched to targets[k]."""
    if len(values) != len(targets):
        raise ValueError("length mismatch")
    n = len(values)
    d = np.abs(values[None, :] - targets[:, None])  # rows: targets
    perm = np.full(n, -1, dtype=np.int64)
    max_err = 0.0
    for _ in range(n):
        k = int(np.argmin(d))
        ti, vj = divmod(k, n)
        max_err = max(max_err, float(d[ti, vj]))
        perm[ti] = vj
        d[ti, :] = np.inf
        d[:, vj] = np.inf
    return perm, max_err


# ---------------------------------------------------------------------------
# integer-cell partition for unbounded spectra


@dataclass(frozen=True)
class CellAssignment:
    cells: dict
    reassigned: tuple

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.cells.values())


def _cell_of(x: float, y: float) -> tuple[int, int]:
    # half-open cells (n, n+1] x (k, k+1]
    return (int(math.ceil(x)) - 1, int(math.ceil(y)) - 1)


def cell_partition(points, horizon: int | None = None,
                   isolation_radius: float = 0.05) -> CellAssignment:
    """Assign each eigenvalue to its half-open integer cell, then move
    isolated included-boundary points next to their accumulation.

    `points` is a complex array or a SpectrumModel (with `horizon`).
    A point on a cell's included edge (integral coordinate) that has no
    cellmate within the isolation radius moves to whichever admissible
    neighbour cell ((n+1,k), (n,k+1) or (n+1,k+1)) holds the most points
    within that radius; ties break in that order.
    """
    if isinstance(points, SpectrumModel):
        if horizon is None:
            raise ValueError("horizon required with a model")
        points = lambda_block(points, horizon)
    pts = np.ascontiguousarray(points, dtype=np.complex128)

    cells: dict = {}
    keys = []
    for i, z in enumerate(pts):
        key = _cell_of(z.real, z.imag)
        keys.append(key)
        cells.setdefault(key, []).append(i + 1)

    reassigned = []
    for i, z in enumerate(pts):
        x, y = z.real, z.imag
        on_x = x == math.ceil(x)
        on_y = y == math.ceil(y)
        if not (on_x or on_y):
            continue
        key = keys[i]
        mates = [j for j in cells[key] if j != i + 1
                 and abs(pts[j - 1] - z) <= isolation_radius]
        if mates:
            continue
        n, k = key
        if on_x and on_y:
            candidates = [(n + 1, k), (n, k + 1), (n + 1, k + 1)]
        elif on_x:
            candidates = [(n + 1, k)]
        else:
            candidates = [(n, k + 1)]
        best, best_count = None, 0
        for cand in candidates:
            members = cells.get(cand, ())
            count = sum(1 for j in members
                        if abs(pts[j - 1] - z) <= isolation_radius)
            if count > best_count:
                best, best_count = cand, count
        if best is not None:
            cells[key].remove(i + 1)
            if not cells[key]:
                del cells[key]
            cells.setdefault(best, []).append(i + 1)
            keys[i] = best
            reassigned.append((i + 1, key, best))

    cells = {k: np.array(sorted(v), dtype=np.int64)
             for k, v in cells.items()}
    return CellAssignment(cells=cells, reassigned=tuple(reassigned))


def cell_weights(assignment: CellAssignment, norms: dict) -> dict:
    """Scaling alpha_{n,k} = 2^-(|n|+|k|+1) / (1 + ||u_{n,k}||); the double
    sum of alpha^2 ||u|| is then dominated by a geometric series."""
    out = {}
    for key in assignment.cells:
        n, k = key
        norm = float(norms[key])
        out[key] = 2.0 ** -(abs(n) + abs(k) + 1) / (1.0 + norm)
    return out
