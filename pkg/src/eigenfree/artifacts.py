"""Artifact persistence: canonical JSON and CSV writers, schema checks.

Serialization is canonical so that identical constructions yield
byte-identical files: fixed key order (insertion order of the writers),
compact separators, one trailing newline, floats via repr (shortest
round-trip form).  CSV floats carry 17 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import SchemaMismatch
from .models import Ball, make_model
from .nonvanishing import CoefficientTable, EpsSchedule, GammaSchedule
from .perturbation import PerturbationBundle
from .range_avoidance import SelectionPlan, StageRecord, WeightedVector
from .util import fmt17

SCHEMA_VERSION = 1

BUNDLE_FILE = "bundle.json"
PLAN_FILE = "plan.json"
COEFFS_FILE = "coeffs.json"
VERIFY_FILE = "verify.json"
VERDICTS_FILE = "verdicts.jsonl"
HEATMAP_FILE = "heatmap.csv"
EIGS_FILE = "eigs.csv"
GROWTH_FILE = "growth.csv"


def dump_json_bytes(obj) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False)
            + "\n").encode("utf-8")


def write_json(path: Path, obj) -> None:
    Path(path).write_bytes(dump_json_bytes(obj))


def load_json(path: Path, kind: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaMismatch(f"{path}: expected an object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"{path}: schema_version {obj.get('schema_version')!r}, "
            f"expected {SCHEMA_VERSION}")
    if obj.get("kind") != kind:
        raise SchemaMismatch(
            f"{path}: kind {obj.get('kind')!r}, expected {kind!r}")
    return obj


def write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for x in row:
            if isinstance(x, str):
                cells.append(x)
            elif isinstance(x, (int, np.integer)):
                cells.append(str(int(x)))
            else:
                cells.append(fmt17(x))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", "utf-8")


def _pairs(arr: np.ndarray) -> list:
    return [[z.real, z.imag] for z in arr]


def _unpairs(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs],
                    dtype=np.complex128)


def bundle_to_dict(bundle: PerturbationBundle) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "bundle",
        "model": {"id": bundle.model.kind, "params": bundle.model.params},
        "horizon": bundle.horizon,
        "max_stage": bundle.max_stage,
        "delta": bundle.delta,
        "eps_schedule": bundle.table.eps.kind,
        "gamma_schedule": bundle.table.gamma.kind,
        "tail_gamma_beyond": bundle.tail_gamma_beyond,
        "lambdas": _pairs(bundle.lambdas),
        "mus": _pairs(bundle.mus),
        "c": _pairs(bundle.c),
        "u": bundle.u.to_json_dict(),
        "v": bundle.v.to_json_dict(),
        "norms": {"u": bundle.u_norm, "v": bundle.v_norm,
                  "uv": bundle.rank_one_norm,
                  "delta_u_sq": bundle.delta * bundle.u.norm_sq},
    }


def coeffs_to_dict(table: CoefficientTable) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "coeffs",
            **table.to_json_dict()}


def plan_to_dict(plan: SelectionPlan) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "plan",
            **plan.to_json_dict()}


def _vector_from_dict(d: dict) -> WeightedVector:
    entries = d["entries"]
    idx = np.array([e[0] for e in entries], dtype=np.int64)
    val = np.array([complex(e[1], e[2]) for e in entries],
                   dtype=np.complex128)
    vec = WeightedVector.from_entries(idx, val)
    stored = float(d["norm_sq"])
    if abs(stored - vec.norm_sq) > 1e-12 * max(1.0, vec.norm_sq):
        raise SchemaMismatch("stored norm_sq disagrees with entries")
    return vec


def plan_from_dict(d: dict) -> SelectionPlan:
    try:
        model = make_model(d["model"]["id"], d["model"]["params"])
        horizon = int(d["horizon"])
        records = []
        picked = []
        for s in d["stages"]:
            ls = np.array([q[0] for q in s["squares"]], dtype=np.int64)
            ms = np.array([q[1] for q in s["squares"]], dtype=np.int64)
            ipk = np.array(s["i_picks"], dtype=np.int64)
            ball = Ball(complex(s["ball"]["center"][0],
                                s["ball"]["center"][1]),
                        float(s["ball"]["radius"]))
            records.append(StageRecord(
                stage=int(s["stage"]), square_ls=ls, square_ms=ms,
                i_picks=ipk, ball=ball,
                ball_cover_stage=int(s["ball"]["cover_stage"]),
                j_pick=int(s["j_pick"])))
            picked.append(ipk)
            picked.append(np.array([s["j_pick"]], dtype=np.int64))
        taken = np.concatenate(picked) if picked else np.empty(0, np.int64)
        leftover = np.setdiff1d(np.arange(1, horizon + 1, dtype=np.int64),
                                taken)
        if len(leftover) != int(d["leftover_count"]):
            raise SchemaMismatch("leftover count disagrees with picks")
        return SelectionPlan(model=model, max_stage=int(d["max_stage"]),
                             horizon=horizon, stages=tuple(records),
                             leftover=leftover)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"malformed plan: {exc}") from exc


def bundle_from_dicts(bd: dict, plan: SelectionPlan) -> PerturbationBundle:
    try:
        model = make_model(bd["model"]["id"], bd["model"]["params"])
        horizon = int(bd["horizon"])
        delta = float(bd["delta"])
        lambdas = _unpairs(bd["lambdas"])
        mus = _unpairs(bd["mus"])
        c = _unpairs(bd["c"])
        u = _vector_from_dict(bd["u"])
        v = _vector_from_dict(bd["v"])
        beyond = float(bd["tail_gamma_beyond"])
        eps = EpsSchedule.make(bd["eps_schedule"], horizon)
        if bd["gamma_schedule"] == "driven":
            gamma = GammaSchedule.make(
                "driven", horizon,
                driven_values=delta * np.abs(u.values) ** 2,
                driven_beyond=beyond)
        else:
            gamma = GammaSchedule.make(bd["gamma_schedule"], horizon)
        table = CoefficientTable(
            model=model, lambdas=lambdas, eps=eps, gamma=gamma, mus=mus,
            heads=np.full(horizon, np.nan, dtype=np.complex128),
            c_limit=c, filled=horizon,
            bound_ok=bool(np.all(np.abs(c) <= gamma.values)
                          and np.all(np.abs(c) > 0.0)))
        table._partial_cache[horizon] = c
        return PerturbationBundle(
            model=model, horizon=horizon, max_stage=int(bd["max_stage"]),
            delta=delta, lambdas=lambdas, u=u, c=c, v=v, mus=mus,
            plan=plan, table=table, tail_gamma_beyond=beyond)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"malformed bundle: {exc}") from exc


def write_artifacts(out_dir: Path, bundle: PerturbationBundle) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / BUNDLE_FILE, bundle_to_dict(bundle))
    write_json(out_dir / PLAN_FILE, plan_to_dict(bundle.plan))
    write_json(out_dir / COEFFS_FILE, coeffs_to_dict(bundle.table))


def load_artifacts(artifact_dir: Path) -> PerturbationBundle:
    artifact_dir = Path(artifact_dir)
    bd = load_json(artifact_dir / BUNDLE_FILE, "bundle")
    pd = load_json(artifact_dir / PLAN_FILE, "plan")
    plan = plan_from_dict(pd)
    bundle = bundle_from_dicts(bd, plan)
    if plan.horizon != bundle.horizon or plan.model != bundle.model:
        raise SchemaMismatch("plan and bundle disagree")
    return bundle
