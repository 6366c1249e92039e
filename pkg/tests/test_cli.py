import json
import os
import subprocess
import sys

import numpy as np
import pytest

from srlab.cli import main
from srlab.grids import ScalarField2D


def run(args):
    return main(args)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_config_command(tmp_path):
    out = tmp_path / "cfg"
    assert run(["config", "--theta-w", "60", "--out", str(out)]) == 0
    summary = read_json(out / "config_summary.json")
    assert summary["weak"]["rho2"] > 2.0
    assert summary["weak"]["supersonic_at_P0"] is True
    assert summary["strong"]["rho2"] > summary["weak"]["rho2"]
    assert summary["weak"]["residuals"]["rh"] < 1e-12
    assert "runconfig_digest" in summary
    # per-branch files round-trip through the configuration loader
    from srlab.reflection import ReflectionConfiguration

    cfg = ReflectionConfiguration.from_json((out / "config_weak.json").read_text())
    assert cfg.branch == "weak"


def test_config_rejects_bad_gas(tmp_path):
    assert run(["config", "--theta-w", "60", "--rho1", "0.5", "--out", str(tmp_path)]) == 2


def test_config_below_detachment_exit_2(tmp_path):
    assert run(["config", "--theta-w", "40", "--out", str(tmp_path)]) == 2


def test_solve_model_and_verify_regularity(tmp_path):
    out = tmp_path / "m"
    rc = run(["solve", "--mode", "model", "--grid", "65,65", "--grade", "0.95",
              "--perturb", "0.2", "--tol", "1e-10", "--out", str(out)])
    assert rc == 0
    field = ScalarField2D.load(out / "grid.srl")
    assert field.meta["final_residual"] <= 1e-10
    assert field.meta["runconfig_digest"]
    rc = run(["verify", "--what", "regularity", "--grid", str(out / "grid.srl"), "--out", str(out)])
    assert rc == 0
    rep = read_json(out / "verify_regularity.json")
    assert rep["checks"]["sonic_second_derivative_limit"] is True
    assert rep["checks"]["boundary_exponent_quadratic"] is True


def test_solve_linear_mode(tmp_path):
    out = tmp_path / "lin"
    rc = run(["solve", "--mode", "linear", "--grid", "65,65", "--grade", "0.95",
              "--tol", "1e-10", "--out", str(out), "--format", "csv"])
    assert rc == 0
    assert (out / "grid.csv").exists()
    rc = run(["verify", "--what", "regularity", "--grid", str(out / "grid.srl"), "--out", str(out)])
    assert rc == 0
    rep = read_json(out / "verify_regularity.json")
    assert rep["checks"]["boundary_exponent_three_halves"] is True


def test_solve_exit_3_on_no_convergence(tmp_path):
    rc = run(["solve", "--mode", "model", "--grid", "49,49", "--tol", "1e-14",
              "--max-iter", "3", "--out", str(tmp_path)])
    assert rc == 3


def test_verify_rh(tmp_path):
    out = tmp_path / "rh"
    run(["config", "--theta-w", "60", "--out", str(out)])
    rc = run(["verify", "--what", "rh", "--config", str(out / "config_weak.json"), "--out", str(out)])
    assert rc == 0
    rep = read_json(out / "verify_rh.json")
    assert rep["checks"]["shock_condition_anchor_zero"] is True
    assert rep["checks"]["gradient_coefficient_forms_agree"] is True
    assert rep["checks"]["sonic_flux_function_unique_root"] is True
    assert (out / "shock_trace.csv").exists()


def test_verify_barriers(tmp_path):
    out = tmp_path / "bar"
    run(["solve", "--mode", "model", "--grid", "65,65", "--grade", "0.95",
         "--perturb", "0.2", "--tol", "1e-10", "--out", str(out)])
    rc = run(["verify", "--what", "barriers", "--grid", str(out / "grid.srl"), "--out", str(out)])
    assert rc == 0
    rep = read_json(out / "verify_barriers.json")
    assert all(rep["checks"].values())


def test_sweep(tmp_path):
    out = tmp_path / "sw"
    rc = run(["sweep", "--theta-min", "55", "--theta-max", "65", "--theta-step", "5",
              "--out", str(out)])
    assert rc == 0
    text = (out / "sweep.csv").read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# runconfig_digest=")
    assert lines[1].startswith("# detachment_bracket_deg=")
    assert len(lines) == 6  # two comments, header, three angles


def test_outputs_deterministic_and_thread_invariant(tmp_path):
    args = ["solve", "--mode", "model", "--grid", "49,49", "--grade", "0.95",
            "--perturb", "0.2", "--tol", "1e-9"]
    outs = []
    for name, threads in (("r1", "1"), ("r2", "4")):
        out = tmp_path / name
        os.environ["SRL_THREADS"] = threads
        try:
            assert run(args + ["--out", str(out)]) == 0
        finally:
            os.environ.pop("SRL_THREADS", None)
        outs.append(out)
    b1 = (outs[0] / "grid.srl").read_bytes()
    b2 = (outs[1] / "grid.srl").read_bytes()
    assert b1 == b2
    assert (outs[0] / "grid.srl.json").read_text() == (outs[1] / "grid.srl.json").read_text()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "srlab.cli", "config", "--theta-w", "60", "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "config_summary.json" in proc.stdout


def test_solve_reflection_and_verify(tmp_path):
    out = tmp_path / "refl"
    rc = run(["solve", "--mode", "reflection", "--grid", "81,41", "--theta-w", "60",
              "--tol", "1e-9", "--max-iter", "8000", "--out", str(out)])
    assert rc == 0
    field = ScalarField2D.load(out / "grid.srl")
    assert field.kind == "sonic_strip"
    assert field.meta["shock_residual"] <= 1e-9
    rc = run(["verify", "--what", "regularity", "--grid", str(out / "grid.srl"), "--out", str(out)])
    assert rc == 0
    rep = read_json(out / "verify_regularity.json")
    assert rep["checks"]["sonic_second_derivative_limit"] is True
    assert any("two-family probe" in w for w in rep["warnings"])
    assert (out / "station_trace.csv").exists()


def test_solve_json_format(tmp_path):
    out = tmp_path / "jf"
    rc = run(["solve", "--mode", "model", "--grid", "33,33", "--tol", "1e-8", "--out", str(out),
              "--format", "json"])
    assert rc == 0
    d = read_json(out / "grid.full.json")
    assert len(d["xs"]) == 33 and len(d["psi"]) == 33
