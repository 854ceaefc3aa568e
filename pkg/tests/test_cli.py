"""Command-line behavior: outputs, exit codes, error routing."""

import os

import pytest
import yaml

from vortexpimc.cli import main
from vortexpimc.harness import snapshot_import
from vortexpimc.meanfield import beta_turning_point, r_squared_2d, r_squared_3d


def write_config(tmp_path, **overrides) -> str:
    doc = {
        "physics": {"alpha": 1.0, "mu": 1.0, "L": 8.0, "N": 2, "M": 8},
        "sweep": {"betas": [0.5, 1.0]},
        "sampler": {
            "seed": 7,
            "sweeps_total": 60,
            "sweeps_burnin": 20,
            "max_bisection_level": 1,
            "translate_radius": 0.8,
            "init_side": 1.0,
        },
        "output": {"directory": str(tmp_path / "out")},
    }
    doc.update(overrides)
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def parse_kv_output(text: str) -> dict:
    pairs = (line.split(" ", 1) for line in text.strip().splitlines())
    return {key: float(value) for key, value in pairs}


def test_formula_prints_predictions(capsys):
    assert main(["formula", "1e7", "1.0", "2000", "20"]) == 0
    out = parse_kv_output(capsys.readouterr().out)
    assert out["r2_3d"] == pytest.approx(r_squared_3d(1e7, 1.0, 2000.0, 20), rel=1e-15)
    assert out["r2_2d"] == pytest.approx(r_squared_2d(1.0, 2000.0, 20), rel=1e-15)
    assert out["beta0"] == pytest.approx(beta_turning_point(1e7, 2000.0, 20), rel=1e-15)


def test_formula_rejects_bad_domain(capsys):
    assert main(["formula", "-1.0", "1.0", "2000", "20"]) == 1
    assert "config error" in capsys.readouterr().err


def test_oracle_prints_exact_values(capsys):
    assert main(["oracle", "1", "1", "1", "4", "4"]) == 0
    out = parse_kv_output(capsys.readouterr().out)
    assert out["r2_exact"] == pytest.approx(7.0 / 12.0, rel=1e-15)
    assert out["a2_exact"] == pytest.approx(5.0 / 6.0, rel=1e-15)


def test_run_and_resume(tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    assert main(["run", cfg_path]) == 0
    out_dir = tmp_path / "out"
    assert (out_dir / "results.csv").exists()
    assert (out_dir / "manifest.json").exists()
    assert "completed 2/2" in capsys.readouterr().out

    assert main(["resume", cfg_path]) == 0  # nothing left to do; still fine
    assert "completed 2/2" in capsys.readouterr().out


def test_run_with_invalid_config_exits_1(tmp_path, capsys):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"physics": {"alpha": 1.0}, "swep": {}}))
    assert main(["run", str(path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_resume_without_manifest_exits_2(tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    assert main(["resume", cfg_path]) == 2
    assert "nothing to resume" in capsys.readouterr().err


def test_snapshot_subcommand(tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    out = str(tmp_path / "snap.csv")
    assert main(["snapshot", cfg_path, "--beta", "0.5", "--out", out, "--sweeps", "5"]) == 0
    state = snapshot_import(out)
    assert state.beads.shape == (2, 8)

    assert main(["snapshot", cfg_path, "--beta", "0.25", "--out", out]) == 1
    assert "not in the sweep" in capsys.readouterr().err


def test_snapshot_burnin_default(tmp_path, capsys):
    cfg_path = write_config(tmp_path)
    out = str(tmp_path / "snap.csv")
    assert main(["snapshot", cfg_path, "--beta", "1.0", "--out", out]) == 0
    assert "burn-in sweeps:" in capsys.readouterr().out
    assert os.path.exists(out)


def test_bad_usage_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["formula", "1.0"])  # missing arguments
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["warp"])  # unknown subcommand
    assert exc.value.code == 1
