import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from flexsynth import save_model, two_mass_axial
from flexsynth.cli import main, parse_recipe
from flexsynth.errors import ConfigError
from flexsynth.output import FRAME_COLUMNS, read_csv, write_csv

ROOT = Path(__file__).resolve().parents[1]
BUNDLED = ROOT / "examples" / "plate_surrogate" / "config.yaml"
GOLDEN = Path(__file__).resolve().parent / "golden"


def _config(tmp_path, **changes):
    doc = yaml.safe_load(BUNDLED.read_text())
    doc.update(changes)
    p = tmp_path / "cfg.yaml"
    p.write_text(yaml.safe_dump(doc))
    return p


# ---- modes -------------------------------------------------------------

def test_modes_rigid_frequencies_zero(tmp_path, capsys):
    assert main(["modes", "--recipe", "plate_surrogate", "--n-flex", "3", "--out",
                 str(tmp_path)]) == 0
    rows = (tmp_path / "modes.csv").read_text().splitlines()
    assert rows[0] == "mode,frequency_hz,kind"
    freqs = [float(r.split(",")[1]) for r in rows[1:]]
    assert freqs[:6] == [0.0] * 6 and all(f > 0 for f in freqs[6:])
    assert "flexible" in capsys.readouterr().out


def test_modes_two_mass_frequency(tmp_path):
    m, k = 1e-3, 7.0
    path = tmp_path / "two.json"
    save_model(two_mass_axial(mass=m, k=k), path)
    assert main(["modes", "--model", str(path), "--n-flex", "1", "--out", str(tmp_path),
                 "--quiet"]) == 0
    last = (tmp_path / "modes.csv").read_text().splitlines()[-1].split(",")
    assert float(last[1]) == pytest.approx(np.sqrt(2 * k / m) / (2 * np.pi), rel=1e-8)


def test_modes_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "flexsynth-model", "version": 1,\n "nodes": [[0, 0, 0]]\n "x": 1}')
    assert main(["modes", "--model", str(path)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_recipe_parsing():
    src = parse_recipe("plate_surrogate:spring_ea=2e8,counts=[5, 2, 2]")
    assert src.params == {"spring_ea": 2e8, "counts": [5, 2, 2]}
    with pytest.raises(ConfigError, match="unknown recipe"):
        parse_recipe("cube")


# ---- simulate ----------------------------------------------------------

def test_simulate_zero_duration(tmp_path):
    assert main(["simulate", "--config", str(_config(tmp_path)), "--t-end", "0",
                 "--out", str(tmp_path), "--quiet"]) == 0
    for name in ("frame.csv", "nodes.csv", "modal.csv"):
        assert read_csv(tmp_path / name).data.shape[0] == 1


def test_simulate_zero_loads(tmp_path):
    cfg = _config(tmp_path, loads=[], t_end=0.002)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    frame = read_csv(tmp_path / "frame.csv")
    motion = [c for c in frame.columns if c.startswith(("origin", "omega", "alpha"))]
    assert all(np.all(frame.column(c) == 0) for c in motion)
    nodes = read_csv(tmp_path / "nodes.csv")
    moving = [c for c in nodes.columns if "_disp_" in c or "_vel_" in c or "_acc" in c]
    assert all(np.all(nodes.column(c) == 0) for c in moving)


def test_simulate_divergence_writes_trailer(tmp_path, capsys):
    loads = [{"node": "LOAD", "direction": [1, 0, 0], "times": [0.0, 0.001, 0.002],
              "values": [0.0, 0.0, 1e308]}]
    cfg = _config(tmp_path, loads=loads, t_end=0.01, n_flex_modes=1)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 1
    table = read_csv(tmp_path / "frame.csv")
    assert table.trailer.startswith("# DIVERGED step=")
    assert np.all(np.isfinite(table.data))
    assert "diverged" in capsys.readouterr().err


def test_simulate_unstable_dt_is_input_error(tmp_path):
    assert main(["simulate", "--config", str(_config(tmp_path)), "--dt", "0.01",
                 "--out", str(tmp_path), "--quiet"]) == 2


def test_determinism(tmp_path):
    cfg = _config(tmp_path, t_end=0.003)
    for run in ("a", "b"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / run),
                     "--quiet"]) == 0
    for name in ("frame.csv", "nodes.csv", "modal.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("command", ["simulate", "rigid"])
def test_golden_files(tmp_path, command):
    assert main([command, "--config", str(BUNDLED), "--t-end", "0.01", "--out", str(tmp_path),
                 "--quiet"]) == 0
    for golden in sorted((GOLDEN / command).glob("*.csv")):
        ref, new = read_csv(golden), read_csv(tmp_path / golden.name)
        assert new.columns == ref.columns
        assert new.data.shape == ref.data.shape
        scale = np.maximum(1.0, np.abs(ref.data).max(axis=0))
        assert np.all(np.abs(new.data - ref.data) <= 1e-10 * scale)


def test_frame_schema_is_stable():
    header = (GOLDEN / "simulate" / "frame.csv").read_text().splitlines()[0]
    assert header.split(",") == FRAME_COLUMNS


# ---- rigid -------------------------------------------------------------

def test_rigid_published_props(tmp_path):
    cfg = _config(tmp_path, t_end=0.001,
                  rigid={"mass": 0.0093, "inertia": [5.4839, 2112.7024, 2117.5701],
                         "com": [0.0, 0.0, 5.0]})
    assert main(["rigid", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    alpha2 = read_csv(tmp_path / "frame.csv").column("alpha_body_2")[0]
    assert alpha2 == pytest.approx(8.4510, rel=1e-5)
    assert alpha2 == pytest.approx(17854.446224960324 / 2112.7024, rel=1e-6)


def test_rigid_zero_loads_constant(tmp_path):
    cfg = _config(tmp_path, loads=[], t_end=0.002)
    assert main(["rigid", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    frame = read_csv(tmp_path / "frame.csv")
    assert np.all(frame.data[:, 1:] == frame.data[0, 1:])


def test_rigid_without_props_or_model(tmp_path, capsys):
    doc = yaml.safe_load(BUNDLED.read_text())
    del doc["model"]
    doc["loads"] = []
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump(doc))
    assert main(["rigid", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "rigid" in capsys.readouterr().err


# ---- compare -----------------------------------------------------------

@pytest.fixture
def frame_csv(tmp_path):
    assert main(["simulate", "--config", str(_config(tmp_path, t_end=0.002)), "--out",
                 str(tmp_path / "run"), "--quiet"]) == 0
    return tmp_path / "run" / "frame.csv"


def test_compare_with_itself(frame_csv, capsys):
    assert main(["compare", str(frame_csv), str(frame_csv), "--json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["passed"]
    assert all(c["max_abs_diff"] == 0 for c in summary["columns"])


def test_compare_perturbed(frame_csv, tmp_path, capsys):
    table = read_csv(frame_csv)
    data = table.data.copy()
    data[:, table.columns.index("omega_body_2")] *= 1.05
    other = tmp_path / "perturbed.csv"
    write_csv(other, table.columns, data)
    assert main(["compare", str(other), str(frame_csv), "--columns", "omega_body_*"]) == 1
    err = capsys.readouterr().err
    assert "omega_body_2" in err and "omega_body_1" not in err


def test_compare_schema_mismatch(frame_csv, tmp_path, capsys):
    table = read_csv(frame_csv)
    other = tmp_path / "renamed.csv"
    cols = ["renamed" if c == "alpha_body_3" else c for c in table.columns]
    write_csv(other, cols, table.data)
    assert main(["compare", str(other), str(frame_csv)]) == 2
    err = capsys.readouterr().err
    assert "renamed" in err and "alpha_body_3" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "flexsynth.cli", "modes", "--model",
                           str(tmp_path / "missing.json")], capture_output=True, text=True)
    assert proc.returncode == 2 and "cannot read" in proc.stderr
