import json

import numpy as np
import pytest

from pllsim import cli
from pllsim.odeint import StepLimitExceeded


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_zero_detuning_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code, io = run(["simulate", "--model", "phase", "--w1", "100000", "--w2free", "100000", "--L", "250",
                    "--x0", "0", "--theta0", "0", "--out", str(out)], capsys)
    assert code == 0
    assert "locked" in io.out and "not_locked" not in io.out
    raw = out.read_bytes()
    assert raw.startswith(b"t,x,theta_delta,g\n") and b"\r" not in raw
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.all(data[:, 3] == 0.0)


def test_csv_is_reproducible(tmp_path, capsys):
    args = ["simulate", "--preset", "example4", "--t-end", "2.5"]
    run(args + ["--out", str(tmp_path / "a.csv")], capsys)
    run(args + ["--out", str(tmp_path / "b.csv")], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    row = (tmp_path / "a.csv").read_text().splitlines()[5]
    assert all(float(v) == float(f"{float(v):.17g}") for v in row.split(","))


def test_tolerance_flag_flips_verdict(capsys):
    _, coarse = run(["simulate", "--model", "phase", "--preset", "example4", "--rtol", "1e-3"], capsys)
    _, fine = run(["simulate", "--model", "phase", "--preset", "example4", "--rtol", "1e-9"], capsys)
    assert coarse.out.split()[0] != fine.out.split()[0]


def test_default_stride_caps_rows(tmp_path, capsys):
    out = tmp_path / "sig.csv"
    code, _ = run(["simulate", "--preset", "example2", "--t-end", "2.5", "--out", str(out)], capsys)
    assert code == 0
    rows = len(out.read_text().splitlines()) - 1
    assert 50_000 < rows <= cli.MAX_ROWS


def test_explicit_stride(tmp_path, capsys):
    out = tmp_path / "s.csv"
    run(["simulate", "--preset", "example4", "--t-end", "2.5", "--stride", "10", "--out", str(out)], capsys)
    full = tmp_path / "f.csv"
    run(["simulate", "--preset", "example4", "--t-end", "2.5", "--stride", "1", "--out", str(full)], capsys)
    n_full = len(full.read_text().splitlines()) - 1
    assert len(out.read_text().splitlines()) - 1 == (n_full - 1) // 10 + 1 + ((n_full - 1) % 10 != 0)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "phase", "w1": 100000, "w2free": 100000, "L": 250,
                               "x0": 0.0, "theta0": 0.0, "t_end": 3.0}))
    args = cli.make_parser().parse_args(["simulate", "--config", str(cfg), "--x0", "0.05"])
    ec = cli.build_config(args)
    assert ec.initial.x == 0.05 and ec.integrator.t_end == 3.0 and ec.model == "phase"
    assert ec.integrator.atol == pytest.approx(1e-10)


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "phase", "--w1", "1e4"],
    ["simulate", "--model", "phase", "--w1", "-1", "--w2free", "1", "--L", "1"],
    ["simulate", "--model", "signal", "--preset", "example1", "--theta0", "1"],
    ["simulate", "--model", "phase", "--preset", "example4", "--theta1-0", "1"],
    ["simulate", "--preset", "example4", "--rtol", "0.5"],
    ["simulate", "--preset", "example4", "--stride", "0"],
])
def test_config_errors(argv, capsys):
    code, io = run(argv, capsys)
    assert code == 2 and "config error" in io.err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"omega": 1}))
    assert run(["simulate", "--config", str(cfg)], capsys)[0] == 2


def test_integrator_error_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise StepLimitExceeded("max_steps reached")

    monkeypatch.setattr(cli, "simulate", boom)
    code, io = run(["simulate", "--preset", "example4"], capsys)
    assert code == 3 and "integrator error" in io.err


def test_orbit_table(capsys):
    code, io = run(["orbits", "--preset", "example4"], capsys)
    assert code == 0
    assert "stable" in io.out and "unstable" in io.out and "gap: 0.000627" in io.out


def test_no_orbits_exit_code(capsys):
    assert run(["orbits", "--w1", "10000", "--w2free", "10000", "--L", "500"], capsys)[0] == 4


def test_bifurcate_without_transition(capsys):
    code, io = run(["bifurcate", "--preset", "example4", "--range", "150", "160"], capsys)
    assert code == 4 and "everywhere" in io.out


def test_basin_grid(tmp_path, capsys):
    out = tmp_path / "basin.csv"
    code, _ = run(["basin", "--w1", "100000", "--w2free", "100000", "--L", "250", "--model", "phase",
                   "--x0-range", "-0.2", "0.2", "--theta0-range", "0", "6", "--resolution", "3", "3",
                   "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x0,theta0,verdict"
    cells = [line.split(",") for line in lines[1:]]
    assert [(float(a), float(b)) for a, b, _ in cells] == [
        (x, t) for x in (-0.2, 0.0, 0.2) for t in (0.0, 3.0, 6.0)]
    assert all(v == "locked" for _, _, v in cells)


def test_basin_parallel_matches_serial(tmp_path, capsys):
    args = ["basin", "--preset", "example4", "--x0-range", "-0.02", "0.2", "--theta0-range", "0", "3",
            "--resolution", "2", "2"]
    run(args + ["--out", str(tmp_path / "s.csv")], capsys)
    run(args + ["--jobs", "2", "--out", str(tmp_path / "p.csv")], capsys)
    assert (tmp_path / "s.csv").read_text() == (tmp_path / "p.csv").read_text()


def test_portrait(tmp_path, capsys):
    code, io = run(["portrait", "--preset", "example4", "--t-end", "2", "--seed", "-0.0052", "0",
                    "--seed", "-0.01", "0", "--x-range", "-0.02", "0.02", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "seed1.csv").read_text().startswith("theta_delta_mod_2pi,x\n")
    orbits = np.loadtxt(tmp_path / "orbits.csv", delimiter=",", skiprows=1)
    assert orbits.shape == (2, 5)


def test_example_two(tmp_path, capsys):
    code, io = run(["example", "2", "--out", str(tmp_path)], capsys)
    assert code == 0 and "PASS" in io.out
    assert (tmp_path / "summary.txt").exists() and (tmp_path / "scenario2.csv").exists()
