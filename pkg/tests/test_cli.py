import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from omnisim.cli import main
from omnisim.output import read_kv
from omnisim.params import default_config_text

FAST = ["--cruise", "0", "--duration", "0.6"]


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), *FAST]) == 0
    for name in ("wheels.csv", "pose.csv", "manifest.json", "params.toml", "plot.py"):
        assert (tmp_path / name).exists()
    wheels = read_csv(tmp_path / "wheels.csv")
    assert len(wheels["tick"]) == 360 * 4
    assert set(wheels["wheel"]) == {1, 2, 3, 4}
    pose = read_csv(tmp_path / "pose.csv")
    assert len(pose["t"]) == 31
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["controller"] == "torque"
    assert manifest["surface"] == "carpet1"
    assert "tracking RMS" in capsys.readouterr().out


def test_run_echoes_case(tmp_path):
    assert main(["run", "--out", str(tmp_path), "--case", "3", "--controller", "pi", "--duration", "0.1"]) == 0
    case = json.loads((tmp_path / "manifest.json").read_text())["case"]
    assert (case["theta0_deg"], case["v_peak"], case["accel"]) == (45.0, 0.8, 1.0)


def test_unknown_surface(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--surface", "tile"]) == 1
    err = capsys.readouterr().err
    assert "tile" in err and "carpet1" in err and "carpet3" in err


def test_unknown_case(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--case", "9"]) == 1
    assert "available" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--controller", "fuzzy"],
    ["run", "--gains", "1"],
    ["run", "--gains=-1,0"],
    ["run", "--duration", "-1"],
    ["tune", "--kp-grid", "", "--ki-grid", "0.1"],
    ["tune", "--kp-grid", "0.1"],
])
def test_usage_errors_exit_one(argv, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(argv + ["--out", str(tmp_path)])
    assert info.value.code == 1


def test_bad_params_file(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[robot]\nmass_M = 0\n")
    assert main(["validate", "--params", str(bad)]) == 1
    assert "mass_M" in capsys.readouterr().err
    assert main(["validate", "--params", str(tmp_path / "missing.toml")]) == 1


def test_validate_defaults(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "no-load 579.617" in out


def test_params_from_environment(tmp_path, monkeypatch):
    cfg = tmp_path / "p.toml"
    cfg.write_text(default_config_text().replace("[surfaces.carpet1]", "[surfaces.rug]"))
    monkeypatch.setenv("OMNISIM_PARAMS", str(cfg))
    assert main(["run", "--out", str(tmp_path / "o"), "--duration", "0.05"]) == 0
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["surface"] == "rug"


def test_compare_both(tmp_path, capsys):
    argv = ["compare", "--out", str(tmp_path), "--case", "4", *FAST, "--surfaces", "carpet1,carpet3"]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "verdict:" in out
    kv = read_kv(tmp_path / "report.kv")
    assert kv["verdict"] in ("torque", "pi", "tie")
    assert float(kv["torque.deviation.carpet1.carpet3"]) == float(kv["torque.deviation.carpet3.carpet1"])
    assert float(kv["pi.deviation.carpet1.carpet1"]) == 0.0
    assert sorted(p.name for p in (tmp_path / "paths").iterdir()) == [
        "pi_carpet1.csv", "pi_carpet3.csv", "torque_carpet1.csv", "torque_carpet3.csv"]
    assert "verdict:" in (tmp_path / "report.txt").read_text()


def test_compare_duplicate_surface_is_zero(tmp_path):
    argv = ["compare", "--out", str(tmp_path), "--controller", "pi", "--surfaces", "carpet2,carpet2", *FAST]
    assert main(argv) == 0
    kv = read_kv(tmp_path / "report.kv")
    assert float(kv["pi.max_deviation"]) == 0.0
    assert "verdict" not in kv


def test_compare_needs_two_surfaces(tmp_path):
    assert main(["compare", "--out", str(tmp_path), "--surfaces", "carpet1"]) == 1


def test_profiles_case1_peaks(tmp_path):
    assert main(["profiles", "--out", str(tmp_path)]) == 0
    prof = read_csv(tmp_path / "profiles.csv")
    peaks = [prof[f"wheel{i}"][np.argmax(np.abs(prof[f"wheel{i}"]))] for i in range(1, 5)]
    np.testing.assert_allclose(peaks, [-42.8849633870100, -42.8849633870100, 55.6776993060274, 55.6776993060274],
                               rtol=1e-12)
    assert prof["t"][-1] == pytest.approx(2 * 2 / 3 + 2)


def test_profiles_ignore_initial_orientation(tmp_path):
    main(["profiles", "--out", str(tmp_path / "c3"), "--case", "3"])
    main(["profiles", "--out", str(tmp_path / "c4"), "--case", "4"])
    assert (tmp_path / "c3" / "profiles.csv").read_bytes() == (tmp_path / "c4" / "profiles.csv").read_bytes()


def test_profiles_triangle(tmp_path):
    main(["profiles", "--out", str(tmp_path), "--case", "4", "--cruise", "0"])
    w1 = read_csv(tmp_path / "profiles.csv")["wheel1"]
    peak = int(np.argmax(np.abs(w1)))
    assert 0 < peak < len(w1) - 1
    assert np.all(np.diff(np.abs(w1[:peak + 1])) > 0)
    assert np.all(np.diff(np.abs(w1[peak:])) < 0)


def test_tune_singleton(tmp_path, capsys):
    argv = ["tune", "--out", str(tmp_path), "--kp-grid", "0.04", "--ki-grid", "0.0002", *FAST]
    assert main(argv) == 0
    kv = read_kv(tmp_path / "tune.kv")
    assert (float(kv["kp"]), float(kv["ki"])) == (0.04, 0.0002)
    assert float(kv["score"]) > 0
    assert "kp=0.040000000000000001" in capsys.readouterr().out


def test_outputs_are_reproducible(tmp_path):
    for d in ("a", "b"):
        main(["run", "--out", str(tmp_path / d), "--controller", "pi", *FAST])
    for name in ("wheels.csv", "pose.csv", "manifest.json", "params.toml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "omnisim.cli", "validate"], capture_output=True, text=True)
    assert r.returncode == 0 and "ok" in r.stdout
