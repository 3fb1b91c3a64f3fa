import csv
import hashlib
import json
import os
import subprocess
import sys

import pytest

from asrmeso.cli import main
from asrmeso.observables import COLUMNS, TimeSeries

TINY = """
[scenario]
name = "tiny"

[geometry]
box = [24.0, 24.0, 24.0]
h = 3.0
seed = 2

[geometry.sieve]
d_min = 4.0
d_max = 8.0
v_agg = 0.25

[geometry.gel]
ratio = 0.05

[solver]
T_real = 200.0
n_steps = 300

[output]
record_every = 30
"""


@pytest.fixture
def tiny(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY)
    return p


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _lines(out):
    return dict(line.split(" = ", 1) for line in out.splitlines() if " = " in line)


def test_presets_lists_shipped_presets(capsys):
    assert main(["presets"]) == 0
    names = capsys.readouterr().out.split()
    assert "asr-free-30C" in names and "creep-5MPa" in names


def test_dry_run_prints_resolved_config(tiny, capsys):
    assert main(["run", str(tiny), "--dry-run", "--set", "kinetics.K=1500"]) == 0
    kv = _lines(capsys.readouterr().out)
    assert kv["kinetics.K"] == "1500"
    assert kv["geometry.box"] == "[24.0, 24.0, 24.0]"
    assert "config_hash" in kv


def test_missing_config_exits_2_naming_path(tmp_path, capsys):
    missing = tmp_path / "absent.toml"
    assert main(["run", str(missing), "--dry-run"]) == 2
    assert str(missing) in capsys.readouterr().err


def test_bad_set_path_exits_2_listing_paths(tiny, capsys):
    assert main(["run", str(tiny), "--dry-run", "--set", "kinetics.KK=1"]) == 2
    err = capsys.readouterr().err
    assert "kinetics.KK" in err and "kinetics.K" in err and "solver.n_steps" in err


def test_generate_is_reproducible_per_seed(tiny, tmp_path, capsys):
    outs = []
    for k, seed in enumerate((5, 5, 6)):
        d = tmp_path / f"g{k}"
        assert main(["generate", str(tiny), "--seed", str(seed), "--out", str(d)]) == 0
        outs.append((_sha(d / "structure.txt"), _sha(d / "mesh.vtk")))
    kv = _lines(capsys.readouterr().out)
    assert kv["seed"] == "6"
    assert outs[0] == outs[1]
    assert outs[0] != outs[2]


@pytest.mark.slow
def test_generate_full_scale_preset_reaches_aggregate_fraction(tmp_path, capsys):
    assert main(["generate", "--preset", "asr-free-30C", "--out", str(tmp_path)]) == 0
    kv = _lines(capsys.readouterr().out)
    assert float(kv["v_agg_spheres"]) >= 0.40
    assert abs(float(kv["v_agg_elements"]) - 0.40) <= 0.04


def test_packing_saturation_exits_4(tiny, capsys):
    rc = main(["generate", str(tiny), "--set", "geometry.clearance=4.0", "--set", "geometry.max_rejects=200"])
    assert rc == 4
    assert "saturated" in capsys.readouterr().err


def test_run_writes_series_and_manifest(tiny, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["run", str(tiny), "--out", str(out), "--threads", "1"]) == 0
    stdout = capsys.readouterr().out
    assert "t_real=" in stdout and "eps_z=" in stdout
    ts = TimeSeries.read_csv(out / "series.csv")
    assert ts.t[0] == 0.0
    assert ts.t[-1] == pytest.approx(200.0, rel=1e-12)
    assert len(ts) == 300 // 30 + 1
    man = json.loads((out / "manifest.json").read_text())
    assert man["n_steps"] == 300 and man["seed"] == 2
    assert ts["mean_eps_gel"][-1] > 0


def test_divergence_exits_3(tiny, tmp_path, capsys):
    rc = main(["run", str(tiny), "--quiet", "--out", str(tmp_path / "d"),
               "--set", "solver.dt=1e-4", "--set", "solver.damping=0.0"])
    assert rc == 3
    assert "error" in capsys.readouterr().err


def test_sweep_writes_comparison(tiny, tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", str(tiny), "--quiet", "--out", str(out),
                 "--param", "kinetics.K", "--values", "1500", "2500"]) == 0
    with open(out / "comparison.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["t_real", "eps_z[kinetics.K=1500]", "frac_dmg_agg[kinetics.K=1500]",
                           "frac_dmg_paste[kinetics.K=1500]"]
    assert len(rows) == 300 // 30 + 2
    for k in range(2):
        ts = TimeSeries.read_csv(out / f"variant_{k:02d}" / "series.csv")
        assert [float(r[0]) for r in rows[1:]] == list(ts.t)
    a = TimeSeries.read_csv(out / "variant_00" / "series.csv")["mean_eps_gel"][-1]
    b = TimeSeries.read_csv(out / "variant_01" / "series.csv")["mean_eps_gel"][-1]
    assert b > a


def test_sweep_unknown_param_exits_2(tiny, capsys):
    assert main(["sweep", str(tiny), "--param", "kinetics.Q", "--values", "1"]) == 2


def test_console_script_and_thread_env(tiny, tmp_path):
    env = dict(os.environ, ASRMESO_THREADS="1")
    r = subprocess.run([sys.executable, "-m", "asrmeso.cli", "run", str(tiny), "--dry-run"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0, r.stderr
    env["ASRMESO_THREADS"] = "many"
    r = subprocess.run([sys.executable, "-m", "asrmeso.cli", "run", str(tiny), "--quiet",
                        "--out", str(tmp_path / "x")], capture_output=True, text=True, env=env)
    assert r.returncode == 2
    assert "ASRMESO_THREADS" in r.stderr


def test_columns_documented_in_header(tiny, tmp_path, capsys):
    out = tmp_path / "h"
    assert main(["run", str(tiny), "--quiet", "--out", str(out)]) == 0
    assert (out / "series.csv").read_text().splitlines()[0].split(",") == list(COLUMNS)
