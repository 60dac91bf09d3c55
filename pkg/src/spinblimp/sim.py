"""Fixed-step RK4 simulation of either model under a pluggable policy.

A policy is any callable ``policy(t, state) -> control.Command``.  Policies may
also define

``reset(rng)``
    called once before the run with the seeded ``numpy.random.Generator``;
``update(t, state)``
    called exactly once per integration step, before the command is
    evaluated (sensing, goal switching and other stateful work).

Two ways of applying the command are supported.  ``control_mode="hold"``
evaluates the policy once per control period and holds the thrusts constant
over the step, like a digital controller.  ``control_mode="stage"`` evaluates
the (pure) command at every Runge-Kutta stage, so a smooth closed loop is
integrated at fourth order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .analysis import lyapunov_xy, lyapunov_z_value
from .control import Command, Gains
from .core import ControlInput, State, VehicleParams

MODELS = ("full", "simplified")
CONTROL_MODES = ("hold", "stage")


class SimulationError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, step: int, t: float, message: str = "non-finite state"):
        super().__init__(f"integration blow-up at step {step} (t = {t:.6g} s): {message}")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class SimConfig:
    duration: float = 10.0
    dt: float = 1e-3
    model: str = "simplified"
    seed: int = 0
    log_stride: int = 10
    control_stride: int = 1
    control_mode: str = "hold"
    monitors: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0 (got {self.dt!r})")
        if not self.duration >= self.dt:
            raise ValueError(f"duration must be >= dt (got {self.duration!r})")
        if self.log_stride < 1 or self.control_stride < 1:
            raise ValueError("log_stride and control_stride must be >= 1")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS} (got {self.model!r})")
        if self.control_mode not in CONTROL_MODES:
            raise ValueError(f"control_mode must be one of {CONTROL_MODES} (got {self.control_mode!r})")
        if self.control_mode == "stage" and self.control_stride != 1:
            raise ValueError("control_stride > 1 requires control_mode = 'hold'")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


class LogRow(NamedTuple):
    t: float
    x: float
    y: float
    z: float
    vx: float
    vy: float
    vz: float
    roll: float
    pitch: float
    yaw: float
    wx: float
    wy: float
    wz: float
    f1: float
    f2: float
    xd: float
    yd: float
    zd: float
    beta: float
    omega_z_setpoint: float
    e: float
    V_z: float
    V_xy: float


COLUMNS = LogRow._fields
MONITOR_COLUMNS = ("V_z", "V_xy")


@dataclass
class SimResult(Sequence):
    """Logged rows of a run plus run-level facts."""

    rows: list
    final: State
    steps: int
    columns: tuple = COLUMNS
    penetrations: int = 0
    error: Optional[SimulationError] = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def column(self, name: str) -> np.ndarray:
        i = COLUMNS.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self, path, monitors: bool = True) -> None:
        write_csv(path, self.rows, monitors=monitors)


def step_rk4(state: State, u: ControlInput, dt: float, model: str, params: VehicleParams) -> State:
    """One classical RK4 step with the thrusts held constant."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    _, rk4 = kernels.get(model)
    y = rk4(state.to_vector(model), u.f1, u.f2, dt, params.packed)
    if not np.isfinite(y).all():
        raise SimulationError(0, dt)
    return State.from_vector(y, model)


def _state_from_stage(y, model: str) -> State:
    if model == "full":
        y = np.array(y, dtype=float)
        y[6:10] /= math.sqrt(float(y[6:10] @ y[6:10]))
    return State.from_vector(y, model)


def _log_row(t: float, s: State, cmd: Command, params: VehicleParams, gains: Gains, monitors: bool) -> LogRow:
    p, v, a, w = s.pos, s.vel, s.att, s.omega
    u = cmd.u
    ref = cmd.ref
    nan = math.nan
    if ref is None:
        xd = yd = zd = e = V_z = V_xy = nan
    else:
        r = ref.pos
        xd, yd, zd = r.x, r.y, r.z
        ex, ey, ez = r.x - p.x, r.y - p.y, r.z - p.z
        e = math.sqrt(ex * ex + ey * ey + ez * ez)
        if monitors:
            rv = ref.vel
            V_z = lyapunov_z_value(ez, rv.z - v.z, params, gains)
            V_xy = lyapunov_xy((ex, ey), (rv.x - v.x, rv.y - v.y))
        else:
            V_z = V_xy = nan
    return LogRow(t, p.x, p.y, p.z, v.x, v.y, v.z, a.roll, a.pitch, a.yaw, w.x, w.y, w.z,
                  u.f1, u.f2, xd, yd, zd, cmd.beta, cmd.omega_star, e, V_z, V_xy)


def simulate(initial: State, policy: Callable[[float, State], Command], cfg: SimConfig,
             params: VehicleParams, env=None, gains: Optional[Gains] = None,
             raise_on_error: bool = True, backend: Optional[str] = None) -> SimResult:
    """Integrate ``cfg.duration`` seconds from ``initial`` under ``policy``.

    Thrusts are saturated to ``[0, f_max]`` before they reach the dynamics.
    With ``env`` given, every step is checked for crossing a wall and the
    count is reported as ``penetrations``.  On a blow-up the rows logged so
    far are kept; the error is raised, or stored on the result when
    ``raise_on_error`` is false.
    """
    gains = gains or Gains()
    model = cfg.model
    deriv, rk4 = kernels.get(model, backend)
    pk = params.packed
    f_max = params.f_max
    dt = cfg.dt
    n = cfg.n_steps
    stage = cfg.control_mode == "stage"
    has_update = hasattr(policy, "update")
    if hasattr(policy, "reset"):
        policy.reset(np.random.default_rng(cfg.seed))

    y = initial.to_vector(model)
    state = initial
    rows = []
    penetrations = 0
    error = None
    cmd = None
    k = 0
    for k in range(n):
        t = k * dt
        if has_update:
            policy.update(t, state)
        if stage or k % cfg.control_stride == 0:
            cmd = policy(t, state)
            u = cmd.u.clamp(f_max)
        if k % cfg.log_stride == 0:
            rows.append(_log_row(t, state, cmd._replace(u=u), params, gains, cfg.monitors))

        if stage:
            h = 0.5 * dt
            k1 = deriv(y, u.f1, u.f2, pk)
            y2 = y + h * k1
            u2 = policy(t + h, _state_from_stage(y2, model)).u.clamp(f_max)
            k2 = deriv(y2, u2.f1, u2.f2, pk)
            y3 = y + h * k2
            u3 = policy(t + h, _state_from_stage(y3, model)).u.clamp(f_max)
            k3 = deriv(y3, u3.f1, u3.f2, pk)
            y4 = y + dt * k3
            u4 = policy(t + dt, _state_from_stage(y4, model)).u.clamp(f_max)
            k4 = deriv(y4, u4.f1, u4.f2, pk)
            y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if model == "full":
                y_new[6:10] /= math.sqrt(float(y_new[6:10] @ y_new[6:10]))
        else:
            y_new = rk4(y, u.f1, u.f2, dt, pk)

        if not np.isfinite(y_new).all():
            error = SimulationError(k, t)
            break
        if env is not None and env.crosses_wall((y[0], y[1]), (y_new[0], y_new[1])):
            penetrations += 1
        y = y_new
        state = State.from_vector(y, model)
    else:
        k = n
        t = n * dt
        if has_update:
            policy.update(t, state)
        cmd = policy(t, state)
        rows.append(_log_row(t, state, cmd._replace(u=cmd.u.clamp(f_max)), params, gains, cfg.monitors))

    result = SimResult(rows, state, k, penetrations=penetrations, error=error)
    if error is not None and raise_on_error:
        raise error
    return result


# ---------------------------------------------------------------------------
# CSV


def write_csv(path, rows, monitors: bool = True) -> None:
    cols = COLUMNS if monitors else tuple(c for c in COLUMNS if c not in MONITOR_COLUMNS)
    idx = [COLUMNS.index(c) for c in cols]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(r[i])) for i in idx])


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a log CSV back into ``{column: array}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}
