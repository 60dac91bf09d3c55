"""Height control through the spin rate and bang-bang planar position control.

Height is regulated by choosing a spin-rate setpoint whose wing lift gives the
desired vertical acceleration; both motors then track that spin rate with a
proportional law plus drag feed-forward.  Planar motion comes from a thrust
difference ``2 tau`` whose sign flips every half revolution so that the net
motor force always points into the goal half-plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from .core import ControlInput, State, Vec3, VehicleParams, wrap_angle

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class Gains:
    K_p: float = 0.4
    K_d: float = 0.6
    k: float = 0.02
    tau: float = 0.02
    hover_deadband: float = 0.05
    goal_eps: float = 1e-6

    def __post_init__(self):
        for name in ("K_p", "K_d", "k", "tau"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0 (got {v!r})")
        if not (self.hover_deadband >= 0 and self.goal_eps > 0):
            raise ValueError("hover_deadband must be >= 0 and goal_eps > 0")

    def check(self, params: VehicleParams) -> None:
        if self.tau > 0.5 * params.f_max:
            raise ValueError(f"tau must be <= f_max / 2 = {0.5 * params.f_max!r} (got {self.tau!r})")


@dataclass(frozen=True)
class Reference:
    pos: Vec3
    vel: Vec3 = Vec3(0.0, 0.0, 0.0)
    acc_z: float = 0.0


class SpinSetpoint(NamedTuple):
    omega: float
    descent_saturated: bool


class Command(NamedTuple):
    """What a policy returns each step: the thrusts plus values worth logging."""

    u: ControlInput
    ref: Optional[Reference] = None
    beta: float = math.nan
    omega_star: float = math.nan


def omega_z_setpoint(z: float, dz: float, ref: Reference, params: VehicleParams, gains: Gains) -> SpinSetpoint:
    """Spin rate whose lift realises a PD law on the height error.

    When the requested lift is negative the vehicle cannot sink faster than its
    passive descent; the setpoint is clamped to zero and flagged.
    """
    rhs = (
        -params.f_b + params.m * params.g
        + gains.K_p * (ref.pos.z - z)
        + gains.K_d * (ref.vel.z - dz)
        + ref.acc_z
    ) / params.k_lift
    if rhs < 0.0:
        return SpinSetpoint(0.0, True)
    return SpinSetpoint(math.sqrt(rhs), False)


def height_thrust(omega_z: float, omega_z_star: float, params: VehicleParams, gains: Gains) -> float:
    """Per-motor thrust of the spin-rate loop before saturation."""
    return gains.k * (omega_z_star - omega_z) + params.d_w / (2.0 * params.l_m) * omega_z * omega_z


def height_control_input(omega_z: float, omega_z_star: float, params: VehicleParams, gains: Gains,
                         clamp: bool = True) -> ControlInput:
    f = height_thrust(omega_z, omega_z_star, params, gains)
    u = ControlInput(f, f)
    return u.clamp(params.f_max) if clamp else u


def compute_beta(state: State, goal: Vec3, eps: float = 1e-6) -> Optional[float]:
    """Angle from the body y axis to the goal, both projected on the world xy plane.

    Returns ``None`` when the goal is within ``eps`` of the vehicle in xy.
    """
    dx = goal.x - state.pos.x
    dy = goal.y - state.pos.y
    if math.hypot(dx, dy) <= eps:
        return None
    a = state.att
    if a.planar_yaw is not None:
        c, s = math.cos(a.planar_yaw), math.sin(a.planar_yaw)
        yb_x, yb_y = -s, c
    else:
        R = a.matrix()
        yb_x, yb_y = R[0, 1], R[1, 1]
    # goal components along the projected body y axis and the axis 90 deg clockwise of it
    g_y = dx * yb_x + dy * yb_y
    g_x = dx * yb_y - dy * yb_x
    return wrap_angle(math.atan2(g_x, g_y))


def bang_bang_sign(beta: float) -> int:
    return 1 if -HALF_PI < beta <= HALF_PI else -1


def position_command(state: State, ref: Reference, params: VehicleParams, gains: Gains) -> Command:
    """Height control plus the switched thrust difference toward ``ref.pos``.

    The differential is applied as ``tau * g(beta) * [+1, -1]``: with motor 1
    pushing along +y_B this drives the vehicle toward the goal.
    """
    sp = omega_z_setpoint(state.pos.z, state.vel.z, ref, params, gains)
    f_h = height_thrust(state.omega.z, sp.omega, params, gains)
    beta = compute_beta(state, ref.pos, gains.goal_eps)
    f1 = f2 = f_h
    if beta is not None:
        e_xy = math.hypot(ref.pos.x - state.pos.x, ref.pos.y - state.pos.y)
        if e_xy > gains.hover_deadband:
            d = gains.tau * bang_bang_sign(beta)
            f1, f2 = f_h + d, f_h - d
    u = ControlInput(f1, f2).clamp(params.f_max)
    return Command(u, ref, math.nan if beta is None else beta, sp.omega)


def position_control(state: State, ref: Reference, params: VehicleParams, gains: Gains) -> ControlInput:
    return position_command(state, ref, params, gains).u


# ---------------------------------------------------------------------------
# Policies usable by ``sim.simulate``: ``policy(t, state) -> Command``.


class SpinHold:
    """Track a fixed spin rate with the height loop's inner law only."""

    def __init__(self, omega_star: float, params: VehicleParams, gains: Gains, clamp: bool = True):
        self.omega_star = omega_star
        self.params = params
        self.gains = gains
        self.clamp = clamp

    def __call__(self, t: float, state: State) -> Command:
        u = height_control_input(state.omega.z, self.omega_star, self.params, self.gains, clamp=self.clamp)
        return Command(u, None, math.nan, self.omega_star)


class HeightController:
    """Altitude hold (no planar actuation) following ``reference(t)``."""

    def __init__(self, reference: Callable[[float], Reference], params: VehicleParams, gains: Gains):
        self.reference = reference
        self.params = params
        self.gains = gains

    def __call__(self, t: float, state: State) -> Command:
        ref = self.reference(t)
        sp = omega_z_setpoint(state.pos.z, state.vel.z, ref, self.params, self.gains)
        u = height_control_input(state.omega.z, sp.omega, self.params, self.gains)
        return Command(u, ref, math.nan, sp.omega)


class PositionController:
    """Full position controller following a time-varying reference."""

    def __init__(self, reference: Callable[[float], Reference], params: VehicleParams, gains: Gains):
        gains.check(params)
        self.reference = reference
        self.params = params
        self.gains = gains

    def __call__(self, t: float, state: State) -> Command:
        return position_command(state, self.reference(t), self.params, self.gains)


def fixed_reference(pos: Vec3) -> Callable[[float], Reference]:
    ref = Reference(pos)
    return lambda t: ref
