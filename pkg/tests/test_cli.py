import json
import re
import subprocess
import sys

import pytest

from szego_lab.cli import main, parse_overrides
from szego_lab.errors import ValidationError


def test_parse_overrides():
    assert parse_overrides(["--sim.dt", "0.01", "--name=x", "--preset.c", "[1, 2]"]) == {
        "sim.dt": 0.01, "name": "x", "preset.c": [1, 2]}
    with pytest.raises(ValidationError):
        parse_overrides(["--sim.dt"])
    with pytest.raises(ValidationError):
        parse_overrides(["stray"])


def test_simulate_default(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--log", "quiet"]) == 0
    out = tmp_path / "default"
    for name in ("trajectory.csv", "trajectory.json", "trajectory_conservation.csv",
                 "conservation.json", "spec.json"):
        assert (out / name).exists()


def test_missing_out_dir_is_created(tmp_path):
    target = tmp_path / "a" / "b" / "c"
    assert main(["simulate", "--out", str(target), "--log", "quiet"]) == 0
    assert (target / "default" / "trajectory.csv").exists()


def test_bad_dt_exits_2(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path), "--sim.dt", "0"]) == 2
    assert "sim.dt" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2
    assert main(["nonsense"]) == 2


def test_config_file(tmp_path):
    spec = {"name": "cfg", "preset": {"kind": "eps_plus_wave", "eps": 0.5},
            "sim": {"t_end": 0.1, "degree": 8, "dt": 1e-2}}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path), "--log", "quiet"]) == 0
    assert json.loads((tmp_path / "cfg" / "spec.json").read_text())["preset"]["eps"] == 0.5


def test_blow_up_exits_3(tmp_path, capsys):
    code = main(["simulate", "--out", str(tmp_path), "--preset.k", "0", "--preset.c", "[1000, 0]",
                 "--sim.dt", "1", "--sim.t_end", "5", "--sim.degree", "1"])
    assert code == 3
    assert re.search(r"non-finite state at step \d+", capsys.readouterr().err)


def test_persistence_blow_up_exits_3(tmp_path):
    code = main(["persistence", "--out", str(tmp_path), "--log", "quiet", "--preset.k", "0",
                 "--preset.c", "[1000, 0]", "--sim.dt", "1", "--sim.t_end", "5", "--sim.degree", "1"])
    assert code == 3


def test_persistence_default(tmp_path):
    assert main(["persistence", "--out", str(tmp_path), "--log", "quiet"]) == 0
    data = json.loads((tmp_path / "default" / "result.json").read_text())
    assert data["passed"] is True
    assert (tmp_path / "default" / "bounds.csv").exists()


def test_hankel_command(tmp_path, capsys):
    code = main(["hankel", "--out", str(tmp_path), "--preset", '{"kind": "custom", "coeffs": [0, 0, 0, 1]}'])
    assert code == 0
    line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("trace_norm")][0]
    assert float(line.split()[1]) == pytest.approx(4, abs=1e-12)
    assert (tmp_path / "default" / "hankel.json").exists()


def test_norms_sigma_zero(tmp_path):
    assert main(["norms", "--out", str(tmp_path), "--sigma", "0",
                 "--preset", '{"kind": "custom", "coeffs": [0.5, [0, 1], -2]}']) == 0
    norms = json.loads((tmp_path / "default" / "norms.json").read_text())["norms"]
    assert norms["wiener"] == norms["gevrey"] == 3.5


def test_sweep_two_rows_exits_2(tmp_path):
    code = main(["sweep-epsilon", "--out", str(tmp_path), "--log", "quiet", "--eps", "0.9", "0.8",
                 "--sim.degree", "16", "--sim.dt", "0.01"])
    assert code == 2
    assert (tmp_path / "eps_sweep" / "sweep.csv").exists()


def test_sweep_rejects_unordered(tmp_path):
    assert main(["sweep-epsilon", "--out", str(tmp_path), "--eps", "0.3", "0.4", "0.2"]) == 2


def test_verify_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path), "--log", "quiet"]) == 0
    data = json.loads((tmp_path / "verdicts.json").read_text())
    assert data["passed"] is True


def test_verify_broken_hook_exits_1(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path), "--break", "rk4_order"]) == 1
    assert "rk4_order" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "szego_lab", "simulate", "--out", str(tmp_path),
                           "--log", "quiet", "--sim.t_end", "0.01"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
