import json

import numpy as np
import pytest

from eigenfree import artifacts as A
from eigenfree import cli
from eigenfree import models as M
from eigenfree import perturbation as P

GRID = "-0.6:1.6:-0.6:1.6:25:0.1"


def run(*argv):
    return cli.main(list(argv))


@pytest.fixture(scope="module")
def artifact_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = run("construct", "--model", "segment", "--stages", "12",
               "--horizon", "2048", "--truncations", "16,32",
               "--out", str(out))
    assert code == 0
    return out


def test_construct_outputs(artifact_dir):
    for name in (A.BUNDLE_FILE, A.PLAN_FILE, A.COEFFS_FILE):
        assert (artifact_dir / name).exists()
    bundle = A.load_artifacts(artifact_dir)
    assert bundle.horizon == 2048
    assert bundle.rank_one_norm <= bundle.delta * bundle.u.norm_sq


def test_construct_deterministic(tmp_path, artifact_dir):
    out2 = tmp_path / "again"
    assert run("construct", "--model", "segment", "--stages", "12",
               "--horizon", "2048", "--truncations", "16,32",
               "--out", str(out2)) == 0
    for name in (A.BUNDLE_FILE, A.PLAN_FILE, A.COEFFS_FILE):
        assert (artifact_dir / name).read_bytes() \
            == (out2 / name).read_bytes()


def test_artifact_roundtrip_bytes(artifact_dir, tmp_path):
    bundle = A.load_artifacts(artifact_dir)
    A.write_artifacts(tmp_path, bundle)
    for name in (A.BUNDLE_FILE, A.PLAN_FILE, A.COEFFS_FILE):
        assert (artifact_dir / name).read_bytes() \
            == (tmp_path / name).read_bytes()


def test_verify_passes_and_repeats(artifact_dir, tmp_path):
    o1, o2 = tmp_path / "v1", tmp_path / "v2"
    for out in (o1, o2):
        code = run("verify", "--artifact", str(artifact_dir),
                   "--out", str(out), f"--grid={GRID}",
                   "--horizon", "2048", "--stages", "12",
                   "--truncations", "16,32")
        assert code == 0
    assert (o1 / A.VERIFY_FILE).read_bytes() == (o2 / A.VERIFY_FILE).read_bytes()
    assert (o1 / A.VERDICTS_FILE).read_bytes() \
        == (o2 / A.VERDICTS_FILE).read_bytes()
    report = json.loads((o1 / A.VERIFY_FILE).read_text())
    assert report["overall_pass"] is True
    assert all(c["pass"] for c in report["checks"])
    names = {c["name"] for c in report["checks"]}
    assert "bundle_invariants" in names and "ionascu_grid" in names
    # verdict lines parse and carry definite branches
    lines = (o1 / A.VERDICTS_FILE).read_text().splitlines()
    branches = {json.loads(ln)["branch"] for ln in lines}
    assert "inconclusive" not in branches


def test_sweep_outputs(artifact_dir, tmp_path):
    out = tmp_path / "sweep"
    code = run("sweep", "--artifact", str(artifact_dir), "--out", str(out),
               f"--grid={GRID}", "--horizon", "2048",
               "--truncations", "16,32")
    assert code == 0
    heat = (out / A.HEATMAP_FILE).read_text().splitlines()
    assert heat[0] == "z_re,z_im,abs_f,tail_bound,margin"
    assert all(float(ln.split(",")[4]) > 0 for ln in heat[1:])
    eigs = (out / A.EIGS_FILE).read_text().splitlines()
    assert eigs[0] == "n,mode,eig_re,eig_im,nearest_mu_dist"
    # partial-coefficient sections hit the nodes
    partial_rows = [ln.split(",") for ln in eigs[1:]
                    if ln.split(",")[1] == "partial"]
    assert max(float(r[4]) for r in partial_rows) < 1e-8
    growth = (out / A.GROWTH_FILE).read_text().splitlines()
    assert growth[0] == "point,z_re,z_im,stage,value,lower_bound"
    assert len(growth) > 1


def test_sweep_nearest_mu_improves_with_n(artifact_dir, tmp_path):
    out = tmp_path / "sweep2"
    assert run("sweep", "--artifact", str(artifact_dir), "--out", str(out),
               f"--grid={GRID}", "--horizon", "2048",
               "--truncations", "16,32,64") == 0
    rows = [ln.split(",") for ln in
            (out / A.EIGS_FILE).read_text().splitlines()[1:]]
    worst = {}
    for r in rows:
        if r[1] == "limit":
            n = int(r[0])
            worst[n] = max(worst.get(n, 0.0), float(r[4]))
    assert worst[64] <= worst[16]


def test_corrupted_artifact_exit_code(artifact_dir, tmp_path):
    bad = tmp_path / "bad"
    bad.mkdir()
    for name in (A.BUNDLE_FILE, A.PLAN_FILE, A.COEFFS_FILE):
        bad.joinpath(name).write_bytes((artifact_dir / name).read_bytes())
    text = bad.joinpath(A.BUNDLE_FILE).read_text()
    bad.joinpath(A.BUNDLE_FILE).write_text(
        text.replace('"schema_version":1', '"schema_version":2'))
    assert run("verify", "--artifact", str(bad), "--out",
               str(tmp_path / "vout"), "--horizon", "2048") == cli.EXIT_VERIFY


def test_config_error_exit_codes(tmp_path):
    assert run("construct", "--model", "segment", "--delta", "-1",
               "--out", str(tmp_path)) == cli.EXIT_CONFIG
    assert run("construct", "--model", "segment", "--horizon", "8",
               "--out", str(tmp_path)) == cli.EXIT_CONFIG  # truncations
    assert run("construct", "--model", "unit_square", "--stages", "1",
               "--horizon", "1", "--truncations", "1",
               "--out", str(tmp_path)) == cli.EXIT_CONSTRUCT


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "model": "segment", "stages": 3, "horizon": 256,
        "delta": 1e-3, "truncations": "8,16", "out": str(tmp_path / "o1")}))
    assert run("construct", "--config", str(cfg)) == 0
    b1 = A.load_artifacts(tmp_path / "o1")
    assert b1.horizon == 256 and b1.max_stage == 3
    # flags override the file
    assert run("construct", "--config", str(cfg), "--horizon", "300",
               "--out", str(tmp_path / "o2")) == 0
    assert A.load_artifacts(tmp_path / "o2").horizon == 300


def test_lab_threads_does_not_change_results(artifact_dir, tmp_path,
                                             monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("LAB_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert run("sweep", "--artifact", str(artifact_dir),
                   "--out", str(out), f"--grid={GRID}",
                   "--horizon", "2048", "--truncations", "16") == 0
        outs.append((out / A.HEATMAP_FILE).read_bytes())
    assert outs[0] == outs[1]


def test_cantor_and_circle_smoke(tmp_path):
    for model in ("cantor", "unit_circle"):
        out = tmp_path / model
        assert run("construct", "--model", model, "--stages", "20",
                   "--horizon", "512", "--truncations", "8,16",
                   "--out", str(out)) == 0
        bundle = A.load_artifacts(out)
        assert bundle.model.kind == model
        assert run("verify", "--artifact", str(out),
                   "--out", str(out), "--grid=-1.5:2.5:-1.5:2.5:20:0.1",
                   "--horizon", "512", "--stages", "20",
                   "--truncations", "8,16") == 0
