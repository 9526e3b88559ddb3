import json
import subprocess
import sys

import numpy as np
import pytest

from ppcheck.cli import main
from ppcheck.data import ObservationSample, PredictiveDraws, write_table
from ppcheck.synthetic import generate


def write_obs(path, values):
    write_table(ObservationSample(values), path)
    return str(path)


@pytest.fixture
def normal_csv(tmp_path):
    return write_obs(tmp_path / "normal.csv", generate("smooth_normal", 1000, seed=42).values)


@pytest.fixture
def bounded_csv(tmp_path):
    return write_obs(tmp_path / "bounded.csv", generate("bounded_exp", 1000, seed=1).values)


def test_density_smooth_passes(tmp_path, normal_csv):
    out, rep = tmp_path / "d.svg", tmp_path / "d.json"
    code = main(["density", "--viz", "kde", "--input", normal_csv, "--seed", "42", "--out", str(out), "--report", str(rep)])
    assert code == 0
    assert out.read_text().startswith("<?xml")
    report = json.loads(rep.read_text())
    assert report["exit_code"] == 0 and report["schema_version"] == "1.0"
    assert report["checks"][0]["verdict"]["pass"] is True


def test_density_bounded_fails_then_reflect_passes(bounded_csv):
    assert main(["density", "--viz", "kde", "--input", bounded_csv]) == 3
    assert main(["density", "--viz", "kde", "--bounds", "auto", "--input", bounded_csv]) == 0
    assert main(["density", "--viz", "qdot", "--input", bounded_csv]) == 0


def test_binary_data_warns(tmp_path, capsys):
    path = write_obs(tmp_path / "bin.csv", np.random.default_rng(0).integers(0, 2, 300).astype(float))
    rep = tmp_path / "r.json"
    main(["density", "--viz", "kde", "--input", path, "--report", str(rep)])
    err = capsys.readouterr().err
    assert "warning: binary data" in err
    recs = json.loads(rep.read_text())["recommendation"]
    assert any("--mode binary" in r for r in recs)


def test_usage_and_data_errors(tmp_path, capsys):
    assert main(["density", "--bogus"]) == 1
    assert main(["density", "--input", str(tmp_path / "missing.csv")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("x\n1\n")
    assert main(["density", "--input", str(bad)]) == 2
    assert "missing column 'y'" in capsys.readouterr().err


def test_env_defaults(tmp_path, monkeypatch, bounded_csv):
    monkeypatch.setenv("PPC_VIZ", "qdot")
    assert main(["density", "--input", bounded_csv]) == 0
    monkeypatch.setenv("PPC_COLUMN", "value")
    assert main(["density", "--input", bounded_csv]) == 2


def test_pit_command(tmp_path):
    grid = write_obs(tmp_path / "u.csv", (np.arange(1, 201) - 0.5) / 200)
    assert main(["pit", "--input", grid]) == 0
    lumped = write_obs(tmp_path / "h.csv", np.full(100, 0.5))
    assert main(["pit", "--input", lumped]) == 3


def test_detect_command(tmp_path, capsys):
    path = write_obs(tmp_path / "pm.csv", generate("point_mass", 1000, seed=2).values)
    assert main(["detect", "--input", path]) == 0
    diag = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert diag["point_mass_values"] == [1.0]


def test_overlay_and_rootogram(tmp_path):
    rng = np.random.default_rng(3)
    obs = write_obs(tmp_path / "c.csv", rng.poisson(3, 200).astype(float))
    write_table(PredictiveDraws(rng.poisson(3, (100, 200))), tmp_path / "draws.csv")
    draws = str(tmp_path / "draws.csv")
    for viz in ("hist", "qdot"):
        assert main(["overlay", "--viz", viz, "--input", obs, "--draws", draws]) == 0
    for style in ("discrete", "hanging"):
        assert main(["rootogram", "--style", style, "--input", obs, "--draws", draws]) == 0
    noncount = write_obs(tmp_path / "nc.csv", rng.normal(size=200))
    assert main(["rootogram", "--input", noncount, "--draws", draws]) == 2


def test_calibration_modes(tmp_path):
    rng = np.random.default_rng(4)
    p = rng.random(300)
    y = (rng.random(300) < p).astype(int)
    (tmp_path / "bin.csv").write_text("pred,y,x\n" + "".join(f"{a:.17g},{b},{c:.17g}\n" for a, b, c in zip(p, 1 - y, p)))
    path = str(tmp_path / "bin.csv")
    assert main(["calibration", "--mode", "binary", "--input", path, "--n-sim", "200"]) == 3
    assert main(["calibration", "--mode", "binary", "--covariate", "x", "--input", path, "--n-sim", "200"]) == 3
    assert main(["calibration", "--mode", "binned", "--input", path]) in (0, 3)
    P = rng.dirichlet(np.ones(3), size=200)
    yc = 1 + (rng.random(200)[:, None] > np.cumsum(P, axis=1)[:, :-1]).sum(axis=1)
    (tmp_path / "cat.csv").write_text(
        "a,b,c,y\n" + "".join(f"{r[0]:.17g},{r[1]:.17g},{1 - r[0] - r[1]:.17g},{v}\n" for r, v in zip(P, yc))
    )
    cat = str(tmp_path / "cat.csv")
    for mode in ("ovo", "ordinal"):
        assert main(["calibration", "--mode", mode, "--probs", "a,b,c", "--input", cat, "--n-sim", "100"]) in (0, 3)
    assert main(["calibration", "--mode", "bar", "--probs", "a,b,c", "--input", cat]) == 0
    assert main(["calibration", "--mode", "ovo", "--input", cat]) == 2


def test_demo_writes_data(tmp_path):
    data = tmp_path / "demo.csv"
    assert main(["demo", "--kind", "bounded_exp", "--data-out", str(data)]) == 3
    assert main(["density", "--input", str(data), "--bounds", "auto"]) == 0


def test_repeat_runs_identical(tmp_path, bounded_csv):
    outs = []
    for i in range(3):
        svg, rep = tmp_path / f"{i}.svg", tmp_path / f"{i}.json"
        main(["density", "--viz", "qdot", "--input", bounded_csv, "--seed", "7", "--out", str(svg), "--report", str(rep)])
        outs.append((svg.read_bytes(), rep.read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_console_entry_point(normal_csv):
    proc = subprocess.run([sys.executable, "-m", "ppcheck", "density", "--input", normal_csv], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PIT uniformity pass" in proc.stdout
