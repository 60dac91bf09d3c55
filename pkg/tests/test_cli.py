import math

import pytest

from spinblimp.cli import main, read_metrics
from spinblimp.config import ConfigError, RunConfig, build_config, load_config, parse_text
from spinblimp.control import Gains
from spinblimp.core import VehicleParams
from spinblimp.sim import read_csv
from spinblimp.trajectory import tracking_metrics


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# --- config --------------------------------------------------------------------

def test_empty_file_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, ""))
    assert cfg.vehicle == VehicleParams() and cfg.gains == Gains()
    assert cfg.experiment == "hover" and not cfg.duration_set
    assert cfg.env == RunConfig().env


def test_invalid_value_names_key(tmp_path):
    with pytest.raises(ConfigError, match=r"vehicle\.f_max"):
        load_config(write(tmp_path, "vehicle.f_max = -1\n"))
    with pytest.raises(ConfigError, match=r"gains\.tau"):
        load_config(write(tmp_path, "gains.tau = 0.1\n"))


def test_long_wing_variant(tmp_path):
    assert load_config(write(tmp_path, "vehicle.l_m = 0.65\n")).vehicle.variant == "long"


@pytest.mark.parametrize("text, line", [
    ("# comment\nvehicle.m = 0.07\nnonsense\n", 3),
    ("\n\nfoo.bar = 1\n", 3),
    ("vehicle.m = abc\n", 1),
    ("vehicle.I = 1, 2\n", 1),
    ("sim.dt = 0.001\nsim.dt = 0.002\n", 2),
    ("env.wall.x = 0,0,1,1\n", 1),
])
def test_parse_errors_carry_line_numbers(tmp_path, text, line):
    with pytest.raises(ConfigError, match=rf":{line}:"):
        load_config(write(tmp_path, text))


def test_values_parsed_and_walls_ordered():
    cfg = build_config(parse_text(
        "vehicle.I = 1e-3, 2e-3, 3e-3  # inertia\n"
        "sim.monitors = false\n"
        "experiment.name = randomwalk\n"
        "env.wall.2 = 1, 1, 0, 1\n"
        "env.wall.0 = 0, 0, 1, 0\n"
        "env.wall.1 = 1, 0, 1, 1\n"
        "env.wall.3 = 0, 1, 0, 0\n"))
    assert cfg.vehicle.I == (1e-3, 2e-3, 3e-3)
    assert cfg.sim.monitors is False
    assert [(w.x1, w.y1) for w in cfg.env.walls] == [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_missing_file_and_bad_experiment(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    with pytest.raises(ConfigError, match="experiment.name"):
        build_config(parse_text("experiment.name = loop\n"))


# --- commands ------------------------------------------------------------------

LISSAJOUS = "experiment.name = lissajous\nlissajous.speed = 0.42\nsim.duration = 8\n"


def test_run_writes_three_files_and_metrics_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, LISSAJOUS)
    out = tmp_path / "runs" / "l1"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    for suffix in (".csv", ".metrics.txt", ".plot.csv"):
        assert (tmp_path / "runs" / f"l1{suffix}").exists()
    metrics = read_metrics(f"{out}.metrics.txt")
    assert "mean_e" in metrics and metrics["monitors_passed"] == "True"
    recomputed = tracking_metrics(read_csv(f"{out}.csv"))
    for k, v in recomputed.items():
        assert repr(v) == metrics[k]
    plot = read_csv(f"{out}.plot.csv")
    assert list(plot) == ["t", "x", "y", "z", "xd", "yd", "zd"]
    assert plot["t"][-1] == pytest.approx(8.0)


def test_same_seed_gives_identical_csv(tmp_path):
    cfg = write(tmp_path, "experiment.name = randomwalk\nsim.duration = 5\nsim.seed = 9\n")
    for name in ("a", "b"):
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "10"]) == 0
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()


def test_flag_overrides(tmp_path):
    out = tmp_path / "h"
    assert main(["run", "--out", str(out), "--duration", "0.5", "--dt", "0.002", "--model", "full"]) == 0
    data = read_csv(f"{out}.csv")
    assert data["t"][-1] == pytest.approx(0.5)
    assert data["t"][1] - data["t"][0] == pytest.approx(0.02)


def test_blow_up_exits_nonzero_with_partial_log(tmp_path):
    cfg = write(tmp_path, "sim.dt = 2.0\nsim.duration = 4000\nsim.log_stride = 1\n")
    out = tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 3
    rows = read_csv(f"{out}.csv")
    assert 0 < len(rows["t"]) < 2000
    assert read_metrics(f"{out}.metrics.txt")["completed"] == "False"


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "vehicle.f_max = -1\n")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "vehicle.f_max" in capsys.readouterr().err


def test_analyze_linearize_report(tmp_path, capsys):
    cfg = write(tmp_path, "op.theta_xy0 = 0.3\nop.psi0 = -0.2\nop.v_xy0 = 0.5\n")
    assert main(["analyze", "--linearize", "--config", str(cfg), "--out", str(tmp_path / "an")]) == 0
    text = capsys.readouterr().out
    vals = dict(line.split(" = ") for line in text.strip().splitlines())
    for k in ("dxy_dtheta", "dxy_dpsi", "dxy_dv", "dz_dpsidot", "fd_max_relative_error"):
        assert k in vals
    assert float(vals["dxy_dtheta"]) == pytest.approx(math.cos(0.1))
    assert float(vals["fd_max_relative_error"]) < 1e-6
    assert (tmp_path / "an.report.txt").read_text() == text


def test_calibrate_command(capsys):
    assert main(["calibrate", "--omega", str(4 * math.pi), "--speed", "0.13"]) == 0
    vals = dict(line.split(" = ") for line in capsys.readouterr().out.strip().splitlines())
    assert float(vals["k_lift"]) == pytest.approx(0.04905 / (16 * math.pi ** 2), rel=1e-9)
    assert float(vals["lissajous_period"]) == pytest.approx(187.6, rel=1e-3)


def test_randomwalk_monitor_failure_sets_exit_status(tmp_path):
    # a room far too small to stop in forces a wall penetration
    cfg = write(tmp_path, "experiment.name = randomwalk\nsim.duration = 30\nrandomwalk.threshold = 0.01\n"
                          "randomwalk.speed = 0.3\n"
                          "env.wall.0 = -0.3,-0.3,0.3,-0.3\nenv.wall.1 = 0.3,-0.3,0.3,0.3\n"
                          "env.wall.2 = 0.3,0.3,-0.3,0.3\nenv.wall.3 = -0.3,0.3,-0.3,-0.3\n")
    out = tmp_path / "rw"
    code = main(["run", "--config", str(cfg), "--out", str(out)])
    m = read_metrics(f"{out}.metrics.txt")
    assert int(m["penetrations"]) > 0
    assert code == 1 and m["monitors_passed"] == "False"
