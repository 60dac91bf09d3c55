"""Forces, torques and state derivatives of the spinning blimp.

Two models share the same force terms:

full
    Newton-Euler rigid body with quaternion attitude, buoyant couple and the
    gyroscopic term ``omega x I omega``.
simplified
    Level vehicle (roll = pitch = 0): the body-to-world rotation collapses to
    ``R_z(psi)``, the buoyant couple vanishes and only ``omega_z`` evolves.

Translational drag is applied in the world frame on the world velocity in
both models, and rotational drag is ``-d_w * w_z * |w_z|`` so that spin in
either direction is damped.

These functions favour readability over speed; the integrators call the
equivalent kernels in :mod:`spinblimp.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import ControlInput, State, Vec3, VehicleParams, rot_z

# body-frame force allocation of u = [f1, f2]: f1 along +y_B, f2 along -y_B
A_MATRIX = np.array([[0.0, 0.0], [1.0, -1.0], [0.0, 0.0]])
# yaw torque allocation, tau_m = l_m * B u
B_MATRIX = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]])


@dataclass(frozen=True)
class StateDot:
    dpos: Vec3
    dvel: Vec3
    datt: Union[tuple, float]  # quaternion rate (full) or d(psi)/dt (simplified)
    domega: Vec3


@dataclass(frozen=True)
class ForceBreakdown:
    """Individual force (world frame) and torque (body frame) contributions."""

    f_m: Vec3
    f_bg: Vec3
    f_l: Vec3
    f_d: Vec3
    tau_m: Vec3
    tau_bg: Vec3
    tau_d: Vec3

    @property
    def total_force(self) -> Vec3:
        return self.f_m + self.f_bg + self.f_l + self.f_d


def motor_force_body(u: ControlInput) -> Vec3:
    return Vec3(0.0, u.f1 - u.f2, 0.0)


def motor_torque_body(u: ControlInput, l_m: float) -> Vec3:
    return Vec3(0.0, 0.0, l_m * (u.f1 + u.f2))


def lift_force_body(k_lift: float, omega_z: float) -> Vec3:
    return Vec3(0.0, 0.0, k_lift * omega_z * omega_z)


def drag_force_world(params: VehicleParams, vel_world: Vec3) -> Vec3:
    v = vel_world
    return Vec3(
        -params.d_x * v.x * abs(v.x),
        -params.d_y * v.y * abs(v.y),
        -params.d_z * v.z * abs(v.z),
    )


def buoyancy_gravity_force_world(params: VehicleParams) -> Vec3:
    return Vec3(0.0, 0.0, params.f_b - params.m * params.g)


def buoyancy_gravity_torque_body(params: VehicleParams, att) -> Vec3:
    """Buoyant couple: buoyancy acts at ``p_b``, weight at ``p_g``.

    Restoring (pendulum-like) when ``p_b`` sits above ``p_g``; zero for a level
    vehicle with both points on the body z axis.
    """
    up_body = att.matrix().T[:, 2]  # world +z expressed in the body frame
    p_b = np.asarray(params.p_b, dtype=float)
    p_g = np.asarray(params.p_g, dtype=float)
    tau = np.cross(p_b, params.f_b * up_body) + np.cross(p_g, -params.m * params.g * up_body)
    return Vec3.from_array(tau)


def rotational_drag_body(d_w: float, omega_z: float) -> Vec3:
    return Vec3(0.0, 0.0, -d_w * omega_z * abs(omega_z))


def _quat_rate(att, omega: Vec3) -> tuple[float, float, float, float]:
    w, x, y, z = att.quaternion
    wx, wy, wz = omega
    return (
        -0.5 * (x * wx + y * wy + z * wz),
        0.5 * (w * wx + y * wz - z * wy),
        0.5 * (w * wy - x * wz + z * wx),
        0.5 * (w * wz + x * wy - y * wx),
    )


def full_derivative(state: State, u: ControlInput, params: VehicleParams) -> tuple[StateDot, ForceBreakdown]:
    R = state.att.matrix()
    f_m = Vec3.from_array(R @ motor_force_body(u).to_array())
    f_bg = buoyancy_gravity_force_world(params)
    f_l = Vec3.from_array(R @ lift_force_body(params.k_lift, state.omega.z).to_array())
    f_d = drag_force_world(params, state.vel)

    tau_m = motor_torque_body(u, params.l_m)
    tau_bg = buoyancy_gravity_torque_body(params, state.att)
    tau_d = rotational_drag_body(params.d_w, state.omega.z)

    I = np.asarray(params.I, dtype=float)
    w = state.omega.to_array()
    gyro = np.cross(w, I * w)
    domega = ((tau_m + tau_bg + tau_d).to_array() - gyro) / I

    forces = ForceBreakdown(f_m, f_bg, f_l, f_d, tau_m, tau_bg, tau_d)
    sd = StateDot(
        dpos=state.vel,
        dvel=forces.total_force * (1.0 / params.m),
        datt=_quat_rate(state.att, state.omega),
        domega=Vec3.from_array(domega),
    )
    return sd, forces


def simplified_derivative(state: State, u: ControlInput, params: VehicleParams) -> StateDot:
    if not state.is_level():
        raise ValueError("simplified model requires roll = pitch = 0 and omega = [0, 0, wz]")
    psi = state.att.planar_yaw if state.att.planar_yaw is not None else state.att.yaw
    wz = state.omega.z
    planar = rot_z(psi) @ (A_MATRIX @ np.array([u.f1, u.f2]))
    vertical = np.array([0.0, 0.0, params.f_b - params.m * params.g + params.k_lift * wz * wz])
    drag = drag_force_world(params, state.vel).to_array()
    dvel = (planar + vertical + drag) / params.m
    dwz = (params.l_m * (u.f1 + u.f2) - params.d_w * wz * abs(wz)) / params.I[2]
    return StateDot(
        dpos=state.vel,
        dvel=Vec3.from_array(dvel),
        datt=wz,
        domega=Vec3(0.0, 0.0, dwz),
    )
