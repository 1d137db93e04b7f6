"""Batch front door: construct artifacts, verify them, sweep grids.

    eigenfree construct --model segment --stages 12 --horizon 4096 \
        --delta 1e-3 --out runs/seg
    eigenfree verify --out runs/seg
    eigenfree sweep --out runs/seg --truncations 16,32,64

Everything is deterministic: no seeds, no wall-clock dependence in any
artifact, so identical configs produce byte-identical outputs.  Exit codes:
0 success, 2 bad configuration, 3 construction failure, 4 verification
failure or artifact mismatch.  LAB_THREADS caps the evaluation worker
count (default 1); results do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as kernels
from . import verification as V
from .artifacts import (EIGS_FILE, GROWTH_FILE, HEATMAP_FILE, SCHEMA_VERSION,
                        VERDICTS_FILE, VERIFY_FILE, dump_json_bytes,
                        load_artifacts, write_artifacts, write_csv,
                        write_json)
from .errors import ConfigError, EigenfreeError, SchemaMismatch
from .models import MODEL_IDS, distance, make_model, validate_model
from .nonvanishing import tail_bound
from .perturbation import construct_bundle, secular_eigenvalues
from .range_avoidance import divergence_diagnostic
from .verification import rectangle_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRUCT = 3
EXIT_VERIFY = 4

_CHUNK = 2048  # fixed evaluation chunk; thread count never changes results


@dataclass(frozen=True)
class GridSpec:
    x0: float = -0.6
    x1: float = 1.6
    y0: float = -0.6
    y1: float = 1.6
    res: int = 40
    min_dist: float = 0.1

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 6:
            raise ConfigError("grid spec is x0:x1:y0:y1:res:min_dist")
        return cls(float(parts[0]), float(parts[1]), float(parts[2]),
                   float(parts[3]), int(parts[4]), float(parts[5]))

    def spec_string(self) -> str:
        return (f"{self.x0}:{self.x1}:{self.y0}:{self.y1}:"
                f"{self.res}:{self.min_dist}")


@dataclass(frozen=True)
class RunConfig:
    model_id: str = "segment"
    model_params: dict = field(default_factory=dict)
    max_stage: int = 12
    horizon: int = 4096
    delta: float = 1e-3
    eps_schedule: str = "quadratic"
    grid: GridSpec = GridSpec()
    truncations: tuple = (16, 32, 64)
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        if self.model_id not in MODEL_IDS:
            raise ConfigError(f"unknown model {self.model_id!r}")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.grid.min_dist <= 0:
            raise ConfigError("grid min distance must be positive")
        if self.truncations and max(self.truncations) > self.horizon:
            raise ConfigError("horizon must cover every truncation")
        if self.max_stage < 0 or self.horizon < 1:
            raise ConfigError("stages >= 0 and horizon >= 1 required")
        return self


def _config_from(args) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat object")

    def pick(flag, key, default):
        return flag if flag is not None else raw.get(key, default)

    grid_text = pick(args.grid, "grid", None)
    grid = GridSpec.parse(grid_text) if grid_text else GridSpec()
    trunc_text = pick(args.truncations, "truncations", "16,32,64")
    if isinstance(trunc_text, str):
        truncs = tuple(int(t) for t in trunc_text.split(",") if t)
    else:
        truncs = tuple(int(t) for t in trunc_text)
    return RunConfig(
        model_id=pick(args.model, "model", "segment"),
        model_params=raw.get("model_params", {}),
        max_stage=int(pick(args.stages, "stages", 12)),
        horizon=int(pick(args.horizon, "horizon", 4096)),
        delta=float(pick(args.delta, "delta", 1e-3)),
        eps_schedule=pick(args.eps, "eps", "quadratic"),
        grid=grid,
        truncations=truncs,
        out_dir=pick(args.out, "out", "out"),
    ).validate()


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


def _eval_f_abs(bundle, zs: np.ndarray) -> np.ndarray:
    """|1 - sum c/(z-lam)| over a grid, chunked (optionally threaded)."""
    chunks = [zs[a:a + _CHUNK] for a in range(0, len(zs), _CHUNK)]
    workers = _threads()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda ch: np.abs(kernels.pf_eval(bundle.lambdas, bundle.c,
                                                  ch)), chunks))
    else:
        parts = [np.abs(kernels.pf_eval(bundle.lambdas, bundle.c, ch))
                 for ch in chunks]
    return np.concatenate(parts) if parts else np.empty(0)


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(config: RunConfig) -> int:
    model = make_model(config.model_id, config.model_params)
    if config.horizon >= 2:
        validate_model(model, min(config.horizon, 2000))
    bundle = construct_bundle(model, config.max_stage, config.horizon,
                              config.delta, config.eps_schedule)
    out = Path(config.out_dir)
    write_artifacts(out, bundle)
    print(f"construct: wrote bundle/plan/coeffs under {out} "
          f"(horizon {bundle.horizon}, stages {bundle.max_stage + 1}, "
          f"||u x v|| = {bundle.rank_one_norm:.6g} "
          f"<= {bundle.delta * bundle.u.norm_sq:.6g})")
    return EXIT_OK


def _verify_checks(config: RunConfig, bundle):
    model = bundle.model
    checks = [V.check_bundle_invariants(bundle),
              V.check_coefficient_bounds([("bundle", bundle.table)])]

    exc_samples = V.exceptional_samples(model, 20)
    mult_need = 10 if model.kind != "unit_square" else 8
    checks.append(V.check_cover_budget(model, stages=12,
                                       sample_points=exc_samples,
                                       min_multiplicity=mult_need))

    processed = bundle.plan.processed_cover_stages()
    if model.kind == "unit_square" and bundle.max_stage >= 5:
        pts = V.density_one_samples(model, 5)
        lo = max(2, bundle.max_stage - 5)
        checks.append(V.check_density_slopes(
            bundle.plan, bundle.u, pts, range(lo, bundle.max_stage + 1)))
    elif model.kind != "unit_square" and processed >= 2:
        pts = V.in_set_points(model, bundle.horizon, 10)
        checks.append(V.check_exceptional_units(
            bundle.plan, bundle.u, pts, processed, slack=2))

    out_pts = V.outside_points(model, 40, config.grid.min_dist)
    checks.append(V.check_outside_bound(bundle.u, model, out_pts))

    growth_rows = []
    for pid, z in enumerate(V.in_set_points(model, bundle.horizon, 5)):
        rep = divergence_diagnostic(bundle.plan, bundle.u, complex(z))
        for stage, val, lb in rep.to_csv_rows():
            growth_rows.append((pid, z.real, z.imag, stage, val, lb))

    hs = [h for h in (8, 16, 32, 64) if 2 * h <= bundle.horizon]
    if hs:
        checks.append(V.check_tail_convergence(bundle.table, hs))

    n_exact = min(100, bundle.horizon)
    grid_all = rectangle_grid(config.grid.x0, config.grid.x1,
                              config.grid.y0, config.grid.y1,
                              config.grid.res, config.grid.res)
    outside = np.array([z for z in grid_all
                        if distance(model, complex(z))
                        >= config.grid.min_dist])
    result, verdicts = V.check_ionascu_grid(
        bundle, n_exact=n_exact, n_inset=min(200, bundle.horizon),
        n_outside=min(len(outside), 2000),
        min_dist=config.grid.min_dist)
    checks.append(result)
    return checks, verdicts, growth_rows


def cmd_verify(config: RunConfig, artifact_dir: Path) -> int:
    t0 = time.perf_counter()
    bundle = load_artifacts(artifact_dir)
    checks, verdicts, growth_rows = _verify_checks(config, bundle)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / GROWTH_FILE,
              ["point", "z_re", "z_im", "stage", "value", "lower_bound"],
              growth_rows)
    overall = all(c.passed for c in checks)
    # runtimes are wall clock and would break byte-identical reports;
    # the canonical file carries null there, stdout shows the real values
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": "verify_report",
        "overall_pass": overall,
        "checks": [{"name": c.name, "pass": c.passed,
                    "measured": c.measured, "threshold": c.threshold,
                    "runtime": None} for c in checks],
    }
    write_json(out / VERIFY_FILE, report)
    with open(out / VERDICTS_FILE, "wb") as fh:
        for v in verdicts:
            fh.write(dump_json_bytes(v.to_json_dict()))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  "
              f"[{c.runtime:.2f}s]  {c.threshold}")
    print(f"verify: {'PASS' if overall else 'FAIL'} "
          f"({len(checks)} checks, {time.perf_counter() - t0:.1f}s) "
          f"-> {out / VERIFY_FILE}")
    return EXIT_OK if overall else EXIT_VERIFY


def cmd_sweep(config: RunConfig, artifact_dir: Path) -> int:
    bundle = load_artifacts(artifact_dir)
    model = bundle.model
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    grid_all = rectangle_grid(config.grid.x0, config.grid.x1,
                              config.grid.y0, config.grid.y1,
                              config.grid.res, config.grid.res)
    dists = np.array([distance(model, complex(z)) for z in grid_all])
    keep = dists >= config.grid.min_dist
    zs, ds = grid_all[keep], dists[keep]
    abs_f = _eval_f_abs(bundle, zs)
    bounds = bundle.tail_gamma_beyond / ds
    write_csv(out / HEATMAP_FILE,
              ["z_re", "z_im", "abs_f", "tail_bound", "margin"],
              ((z.real, z.imag, a, b, a - b)
               for z, a, b in zip(zs, abs_f, bounds)))

    eig_rows = []
    for n in config.truncations:
        for mode in ("partial", "limit"):
            eig = secular_eigenvalues(bundle, n, mode == "partial")
            for e in eig:
                nearest = float(np.min(np.abs(e - bundle.mus[:n])))
                eig_rows.append((n, mode, e.real, e.imag, nearest))
    write_csv(out / EIGS_FILE,
              ["n", "mode", "eig_re", "eig_im", "nearest_mu_dist"],
              eig_rows)

    growth_rows = []
    for pid, z in enumerate(V.in_set_points(model, bundle.horizon, 5)):
        rep = divergence_diagnostic(bundle.plan, bundle.u, complex(z))
        for stage, val, lb in rep.to_csv_rows():
            growth_rows.append((pid, z.real, z.imag, stage, val, lb))
    write_csv(out / GROWTH_FILE,
              ["point", "z_re", "z_im", "stage", "value", "lower_bound"],
              growth_rows)
    print(f"sweep: wrote {HEATMAP_FILE} ({len(zs)} points), {EIGS_FILE} "
          f"({len(eig_rows)} rows), {GROWTH_FILE} ({len(growth_rows)} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eigenfree",
        description="rank-one perturbations of diagonal operators "
                    "with empty point spectrum, at finite truncation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("construct", "verify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--model", choices=MODEL_IDS)
        p.add_argument("--stages", type=int, dest="stages")
        p.add_argument("--horizon", type=int)
        p.add_argument("--delta", type=float)
        p.add_argument("--eps", choices=("quadratic", "dyadic"))
        p.add_argument("--grid", help="x0:x1:y0:y1:res:min_dist")
        p.add_argument("--truncations", help="comma separated sizes")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="flat JSON config file")
        if name != "construct":
            p.add_argument("--artifact",
                           help="artifact directory (default: --out)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "construct":
            return cmd_construct(config)
        artifact_dir = Path(args.artifact or config.out_dir)
        if args.command == "verify":
            return cmd_verify(config, artifact_dir)
        return cmd_sweep(config, artifact_dir)
    except SchemaMismatch as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except EigenfreeError as exc:
        tb = exc.__traceback__
        while tb is not None and tb.tb_next is not None:
            tb = tb.tb_next
        where = ""
        if tb is not None:
            code = tb.tb_frame.f_code
            where = f" ({code.co_filename}:{tb.tb_lineno})"
        print(f"{type(exc).__name__}: {exc}{where}", file=sys.stderr)
        return EXIT_CONSTRUCT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
