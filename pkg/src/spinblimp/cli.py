"""``spinblimp`` command line: run experiments, analyze, calibrate.

Exit status: 0 on success, 1 when a monitor fails, 2 for bad usage or
configuration, 3 when the integration blows up (the partial log is still
written).
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .behavior import RandomWalkPolicy
from .config import ConfigError, RunConfig, build_config, load_config
from .control import HeightController, PositionController, fixed_reference
from .core import State, Vec3
from .sim import SimResult, SimulationError, simulate, write_csv
from .trajectory import (LissajousParams, TriangleParams, calibrate_speed_scale, lissajous_arc_length,
                         lissajous_cross_track, lissajous_ref, tracking_metrics, triangle_ref)

EXIT_OK, EXIT_MONITOR, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
HOVER_DURATION = 60.0
RANDOMWALK_DURATION = 600.0


@dataclass
class Setup:
    """Everything needed to start one simulation."""

    cfg: RunConfig
    initial: State
    policy: object
    env: object = None
    info: dict = None


def _duration(cfg: RunConfig, natural: float) -> RunConfig:
    if cfg.duration_set:
        return cfg
    return replace(cfg, sim=replace(cfg.sim, duration=natural))


def prepare(cfg: RunConfig) -> Setup:
    """Build the policy, initial state and final config for ``cfg.experiment``."""
    params, gains = cfg.vehicle, cfg.gains
    info: dict = {}
    try:
        if cfg.experiment == "hover":
            h = cfg.hover
            w = analysis.hover_omega(params)
            initial = State.hover(Vec3(h.x0, h.y0, h.z_d), w)
            policy = HeightController(fixed_reference(Vec3(h.x0, h.y0, h.z_d)), params, gains)
            cfg = _duration(cfg, HOVER_DURATION)
        elif cfg.experiment == "triangle":
            tr = cfg.triangle
            if not (tr.side > 0 and tr.loops > 0):
                raise ConfigError("triangle.side and triangle.loops must be > 0")
            tp = TriangleParams.equilateral(tr.side, (tr.center_x, tr.center_y), tr.z_d, tr.speed, tr.direction)
            start = tp.loop()[0]
            initial = State.hover(start, analysis.hover_omega(params))
            policy = PositionController(lambda t: triangle_ref(t, tp), params, gains)
            info["period"] = tp.period
            cfg = _duration(cfg, tr.loops * tp.period)
        elif cfg.experiment == "lissajous":
            ls = cfg.lissajous
            if not ls.periods > 0:
                raise ConfigError("lissajous.periods must be > 0")
            lp = LissajousParams(ls.A, ls.B, ls.a, ls.b, ls.delta_x, ls.delta_y, ls.z_d, ls.speed_scale)
            if ls.speed > 0:
                lp = calibrate_speed_scale(lp, ls.speed)
            info["speed_scale"] = lp.speed_scale
            info["period"] = lp.period
            info["mean_speed"] = lissajous_arc_length(lp) / lp.period
            info["_lissajous"] = lp
            initial = State.hover(lissajous_ref(0.0, lp).pos, analysis.hover_omega(params))
            policy = PositionController(lambda t: lissajous_ref(t, lp), params, gains)
            cfg = _duration(cfg, ls.periods * lp.period)
        elif cfg.experiment == "randomwalk":
            rw = cfg.randomwalk
            if rw.spin_rate > 0:
                cal = analysis.calibrate_k_lift(params, rw.spin_rate)
                params = replace(params, k_lift=cal.root)
                info["k_lift"] = cal.root
                cfg = replace(cfg, vehicle=params)
            policy = RandomWalkPolicy(cfg.env, params, gains, rw.speed, rw.threshold, rw.sensor_rate,
                                      rw.max_range, rw.z_d)
            start = (rw.x0, rw.y0)
            if not cfg.env.contains(start):
                raise ConfigError(f"randomwalk start {start} is outside the walls")
            initial = State.hover(Vec3(rw.x0, rw.y0, rw.z_d), analysis.hover_omega(params))
            cfg = _duration(cfg, RANDOMWALK_DURATION)
            return Setup(cfg, initial, policy, cfg.env, info)
        else:
            raise ConfigError(f"experiment {cfg.experiment!r} is not a simulation")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{cfg.experiment}: {exc}") from None
    return Setup(cfg, initial, policy, None, info)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def summarize(setup: Setup, result: SimResult) -> tuple[dict, list[str]]:
    """Metrics written to ``<out>.metrics.txt`` and the names of failed monitors."""
    cfg = setup.cfg
    metrics: dict = {"experiment": cfg.experiment, "steps": result.steps, "completed": result.error is None}
    try:
        metrics.update(tracking_metrics(result))
    except ValueError:
        pass
    failed = [] if result.error is None else ["finite_state"]
    for k, v in (setup.info or {}).items():
        if not k.startswith("_"):
            metrics[k] = v
    if cfg.sim.monitors and len(result):
        Vz, Vxy = result.column("V_z"), result.column("V_xy")
        metrics["V_z_initial"] = float(Vz[0])
        metrics["V_z_ultimate_bound"] = analysis.ultimate_bound(Vz)
        metrics["V_xy_initial"] = float(Vxy[0])
        metrics["V_xy_ultimate_bound"] = analysis.ultimate_bound(Vxy)
        if not (np.isfinite(Vz).all() and np.isfinite(Vxy).all()):
            failed.append("lyapunov_finite")
        if setup.env is not None:
            metrics["penetrations"] = result.penetrations
            if result.penetrations:
                failed.append("no_penetration")
    if isinstance(setup.policy, RandomWalkPolicy):
        metrics["bounces"] = len(setup.policy.bounces)
        metrics["max_scan_gap"] = setup.policy.max_scan_gap
    lp = (setup.info or {}).get("_lissajous")
    if lp is not None and len(result):
        ct = lissajous_cross_track(result.column("x"), result.column("y"), lp)
        metrics["cross_track_ccw"] = ct["ccw"]
        metrics["cross_track_cw"] = ct["cw"]
    metrics["monitors_passed"] = not failed
    return metrics, failed


def write_metrics(path, metrics: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in metrics.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def read_metrics(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            k, _, v = line.partition(" = ")
            out[k] = v.rstrip("\n")
    return out


def write_plot_csv(path, result: SimResult, stride: int) -> None:
    cols = ("t", "x", "y", "z", "xd", "yd", "zd")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        rows = result.rows
        idx = list(range(0, len(rows), stride))
        if rows and idx[-1] != len(rows) - 1:
            idx.append(len(rows) - 1)
        for i in idx:
            r = rows[i]
            fh.write(",".join(repr(float(getattr(r, c))) for c in cols) + "\n")


def run_experiment(cfg: RunConfig, out: Optional[str], stream=sys.stdout) -> int:
    setup = prepare(cfg)
    cfg = setup.cfg
    t0 = time.perf_counter()
    result = simulate(setup.initial, setup.policy, cfg.sim, cfg.vehicle, env=setup.env, gains=cfg.gains,
                      raise_on_error=False)
    elapsed = time.perf_counter() - t0
    metrics, failed = summarize(setup, result)
    if out:
        base = Path(out)
        base.parent.mkdir(parents=True, exist_ok=True)
        write_csv(f"{base}.csv", result.rows, monitors=cfg.sim.monitors)
        write_metrics(f"{base}.metrics.txt", metrics)
        write_plot_csv(f"{base}.plot.csv", result, cfg.output.plot_stride)
    for k, v in metrics.items():
        print(f"{k} = {_fmt(v)}", file=stream)
    print(f"# wall time {elapsed:.2f} s", file=stream)
    if result.error is not None:
        print(f"error: {result.error}", file=sys.stderr)
        return EXIT_BLOWUP
    if failed:
        print(f"error: monitors failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_MONITOR
    return EXIT_OK


def analysis_report(cfg: RunConfig, linearize: bool) -> str:
    p, g = cfg.vehicle, cfg.gains
    lines = [
        f"hover_omega = {_fmt(analysis.hover_omega(p))}",
        f"hover_thrust = {_fmt(analysis.hover_thrust(p))}",
        f"spin_time_constant = {_fmt(analysis.spin_time_constant(p, g.k))}",
        f"net_buoyancy = {_fmt(p.net_buoyancy)}",
        f"variant = {p.variant}",
    ]
    if linearize:
        jac = analysis.linearize_planar(cfg.op)
        for name, v in zip(("dxy_dtheta", "dxy_dpsi", "dxy_dv", "dz_dpsidot"), jac.as_tuple()):
            lines.append(f"{name} = {_fmt(v)}")
        fd = analysis.central_differences(cfg.op, cfg.op_h)
        for name, v in zip(("fd_dxy_dtheta", "fd_dxy_dpsi", "fd_dxy_dv", "fd_dz_dpsidot"), fd.as_tuple()):
            lines.append(f"{name} = {_fmt(v)}")
        lines.append(f"fd_h = {_fmt(cfg.op_h)}")
        lines.append(f"fd_max_relative_error = {_fmt(analysis.finite_difference_check(cfg.op, cfg.op_h))}")
    return "\n".join(lines) + "\n"


def calibration_report(cfg: RunConfig, omega: Optional[float], speed: Optional[float]) -> str:
    p = cfg.vehicle
    w = omega if omega is not None else analysis.hover_omega(p)
    res = analysis.calibrate_k_lift(p, w)
    lines = [
        f"omega_z = {_fmt(w)}",
        f"k_lift = {_fmt(res.root)}",
        f"iterations = {res.iterations}",
        f"residual_accel = {_fmt(res.residual)}",
    ]
    ls = cfg.lissajous
    target = speed if speed is not None else ls.speed
    if target > 0:
        lp = LissajousParams(ls.A, ls.B, ls.a, ls.b, ls.delta_x, ls.delta_y, ls.z_d)
        lp = calibrate_speed_scale(lp, target)
        lines += [f"lissajous_speed = {_fmt(target)}", f"lissajous_speed_scale = {_fmt(lp.speed_scale)}",
                  f"lissajous_period = {_fmt(lp.period)}"]
    return "\n".join(lines) + "\n"


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="configuration file (section.key = value lines)")
    p.add_argument("--out", help="output prefix; writes <out>.csv, <out>.metrics.txt, <out>.plot.csv")
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--model", choices=("full", "simplified"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinblimp", description="Spinning blimp simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the configured experiment")
    _common(r)
    r.add_argument("--experiment", choices=("hover", "triangle", "lissajous", "randomwalk", "analyze"))
    a = sub.add_parser("analyze", help="equilibria and planar linearization report")
    _common(a)
    a.add_argument("--linearize", action="store_true", help="include the four partials and their FD check")
    c = sub.add_parser("calibrate", help="bisection calibration of k_lift and the Lissajous time scale")
    _common(c)
    c.add_argument("--omega", type=float, help="spin rate to hover at (default: current hover rate)")
    c.add_argument("--speed", type=float, help="target mean Lissajous speed")
    return ap


def _load(args) -> RunConfig:
    overrides = {
        "sim.seed": args.seed,
        "sim.dt": args.dt,
        "sim.duration": args.duration,
        "sim.model": args.model,
        "experiment.name": getattr(args, "experiment", None),
    }
    if args.config:
        return load_config(args.config, overrides)
    return build_config({}, overrides)


def _emit(text: str, out: Optional[str], suffix: str) -> None:
    sys.stdout.write(text)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(f"{out}{suffix}").write_text(text, encoding="utf-8")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "run" and cfg.experiment != "analyze":
            return run_experiment(cfg, args.out)
        if args.command in ("run", "analyze"):
            linearize = getattr(args, "linearize", False) or args.command == "run"
            _emit(analysis_report(cfg, linearize), args.out, ".report.txt")
            return EXIT_OK
        _emit(calibration_report(cfg, args.omega, args.speed), args.out, ".calibration.txt")
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:  # pragma: no cover - run_experiment stores errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
