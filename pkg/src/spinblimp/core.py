"""Frames, attitude and the value types shared by every other module.

Conventions
-----------
World frame W: fixed, z up.  Body frame B: origin at the middle of the wing
axle, x along the axle towards motor 1, z up towards the balloon.

Attitudes are unit quaternions ``(w, x, y, z)`` (scalar first) describing the
rotation body -> world, so ``v_W = R(q) @ v_B``.  Euler angles follow the
Z-Y-X (yaw-pitch-roll) convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

import numpy as np

GRAVITY = 9.81
TWO_PI = 2.0 * math.pi


def grams_force(grams: float, g: float = GRAVITY) -> float:
    """Convert a gram-force figure to newtons."""
    return grams * 1e-3 * g


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Vec3 ({self.x}, {self.y}, {self.z})")

    @classmethod
    def zero(cls) -> "Vec3":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, a) -> "Vec3":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y
        yield self.z

    def __add__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x + o.x, self.y + o.y, self.z + o.z)

    def __sub__(self, o: "Vec3") -> "Vec3":
        return Vec3(self.x - o.x, self.y - o.y, self.z - o.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, o: "Vec3") -> float:
        return self.x * o.x + self.y * o.y + self.z * o.z

    def cross(self, o: "Vec3") -> "Vec3":
        return Vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    r = math.fmod(theta, TWO_PI)
    if r > math.pi:
        r -= TWO_PI
    elif r <= -math.pi:
        r += TWO_PI
    return r


def rot_z(psi: float) -> np.ndarray:
    """Counter-clockwise rotation by ``psi`` about the z axis."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def quat_multiply(p, q) -> tuple[float, float, float, float]:
    """Hamilton product ``p * q`` of two scalar-first quaternions."""
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return (
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    )


def quat_to_matrix(w: float, x: float, y: float, z: float) -> np.ndarray:
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


QUAT_NORM_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class Attitude:
    """Unit quaternion attitude (body -> world).

    Planar (yaw-only) attitudes keep the exact yaw angle in ``planar_yaw`` so
    that the simplified model reports roll = pitch = 0 and the integrated yaw
    without a round trip through the quaternion.
    """

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    planar_yaw: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not abs(n - 1.0) <= QUAT_NORM_TOL:
            raise ValueError(f"attitude quaternion not normalized (|q| = {n!r})")

    @classmethod
    def identity(cls) -> "Attitude":
        return cls(1.0, 0.0, 0.0, 0.0, planar_yaw=0.0)

    @classmethod
    def from_quaternion(cls, w, x, y, z) -> "Attitude":
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize quaternion")
        return cls(w / n, x / n, y / n, z / n)

    @classmethod
    def from_yaw(cls, psi: float) -> "Attitude":
        h = 0.5 * psi
        return cls(math.cos(h), 0.0, 0.0, math.sin(h), planar_yaw=psi)

    @classmethod
    def from_euler(cls, roll: float, pitch: float, yaw: float) -> "Attitude":
        cr, sr = math.cos(roll / 2), math.sin(roll / 2)
        cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
        cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
        q = (
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
        return cls.from_quaternion(*q)

    @property
    def quaternion(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    @property
    def is_planar(self) -> bool:
        return self.planar_yaw is not None

    @property
    def roll(self) -> float:
        if self.planar_yaw is not None:
            return 0.0
        w, x, y, z = self.w, self.x, self.y, self.z
        return math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))

    @property
    def pitch(self) -> float:
        if self.planar_yaw is not None:
            return 0.0
        s = 2 * (self.w * self.y - self.z * self.x)
        return math.asin(max(-1.0, min(1.0, s)))

    @property
    def yaw(self) -> float:
        if self.planar_yaw is not None:
            return wrap_angle(self.planar_yaw)
        w, x, y, z = self.w, self.x, self.y, self.z
        return math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))

    def matrix(self) -> np.ndarray:
        """Rotation matrix body -> world."""
        if self.planar_yaw is not None:
            return rot_z(self.planar_yaw)
        return quat_to_matrix(self.w, self.x, self.y, self.z)


def body_to_world(att: Attitude, v: Vec3) -> Vec3:
    return Vec3.from_array(att.matrix() @ v.to_array())


def world_to_body(att: Attitude, v: Vec3) -> Vec3:
    return Vec3.from_array(att.matrix().T @ v.to_array())


@dataclass(frozen=True, slots=True)
class State:
    pos: Vec3
    vel: Vec3
    att: Attitude
    omega: Vec3

    @classmethod
    def hover(cls, pos: Vec3, omega_z: float, yaw: float = 0.0) -> "State":
        return cls(pos, Vec3.zero(), Attitude.from_yaw(yaw), Vec3(0.0, 0.0, omega_z))

    # Packed layouts consumed by the integration kernels.
    #   full:       [x y z vx vy vz qw qx qy qz wx wy wz]
    #   simplified: [x y z vx vy vz psi wz]

    def to_vector(self, model: str) -> np.ndarray:
        p, v, o = self.pos, self.vel, self.omega
        if model == "simplified":
            if not self.is_level():
                raise ValueError("simplified model requires roll = pitch = 0 and omega = [0, 0, wz]")
            psi = self.att.planar_yaw if self.att.planar_yaw is not None else self.att.yaw
            return np.array([p.x, p.y, p.z, v.x, v.y, v.z, psi, o.z])
        a = self.att
        return np.array([p.x, p.y, p.z, v.x, v.y, v.z, a.w, a.x, a.y, a.z, o.x, o.y, o.z])

    @classmethod
    def from_vector(cls, y, model: str) -> "State":
        pos = Vec3(float(y[0]), float(y[1]), float(y[2]))
        vel = Vec3(float(y[3]), float(y[4]), float(y[5]))
        if model == "simplified":
            return cls(pos, vel, Attitude.from_yaw(float(y[6])), Vec3(0.0, 0.0, float(y[7])))
        att = Attitude(float(y[6]), float(y[7]), float(y[8]), float(y[9]))
        return cls(pos, vel, att, Vec3(float(y[10]), float(y[11]), float(y[12])))

    def is_level(self) -> bool:
        a = self.att
        if a.planar_yaw is None and (a.x != 0.0 or a.y != 0.0):
            return False
        return self.omega.x == 0.0 and self.omega.y == 0.0


@dataclass(frozen=True)
class VehicleParams:
    """Physical constants of the vehicle, SI units throughout.

    Defaults describe the short-wing vehicle: 60 gf of balloon buoyancy, a net
    weight of 5 gf, 15 gf of static thrust per motor and a 0.7 m axle
    (``l_m`` is the half-axle).  Set ``l_m = 0.65`` for the 1.3 m long-wing
    variant.  The aerodynamic and inertial coefficients are estimates.
    """

    m: float = 0.065
    g: float = GRAVITY
    f_b: float = grams_force(60.0)
    l_m: float = 0.35
    k_lift: float = 4.905e-4
    d_x: float = 0.02
    d_y: float = 0.02
    d_z: float = 0.03
    d_w: float = 1e-4
    I: tuple[float, float, float] = (2.0e-3, 2.0e-3, 3.5e-3)
    p_b: tuple[float, float, float] = (0.0, 0.0, 0.20)
    p_g: tuple[float, float, float] = (0.0, 0.0, -0.02)
    f_max: float = grams_force(15.0)
    # False skips the heavier-than-air check (neutral-buoyancy experiments)
    strict: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        for name in ("m", "g", "k_lift", "l_m", "f_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0 (got {v!r})")
        for name in ("d_x", "d_y", "d_z", "d_w", "f_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be >= 0 (got {v!r})")
        if len(self.I) != 3 or any(not (math.isfinite(i) and i > 0) for i in self.I):
            raise ValueError(f"I must hold three positive entries (got {self.I!r})")
        for name in ("p_b", "p_g"):
            v = getattr(self, name)
            if len(v) != 3 or not all(math.isfinite(c) for c in v):
                raise ValueError(f"{name} must be three finite numbers (got {v!r})")
        if self.strict and not self.f_b - self.m * self.g < 0:
            raise ValueError("f_b - m*g must be negative (vehicle must be heavier than air)")

    @property
    def net_buoyancy(self) -> float:
        """``f_b - m g`` in newtons (negative)."""
        return self.f_b - self.m * self.g

    @property
    def variant(self) -> str:
        return "long" if self.l_m >= 0.5 else "short"

    @cached_property
    def packed(self) -> np.ndarray:
        """Flat parameter vector in the order expected by the kernels."""
        return np.array([
            self.m, self.g, self.f_b, self.l_m, self.k_lift,
            self.d_x, self.d_y, self.d_z, self.d_w,
            *self.I, *self.p_b, *self.p_g,
        ], dtype=float)


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Motor thrusts ``u = [f1, f2]`` in newtons."""

    f1: float
    f2: float

    def clamp(self, f_max: float) -> "ControlInput":
        return ControlInput(min(max(self.f1, 0.0), f_max), min(max(self.f2, 0.0), f_max))

    def is_admissible(self, f_max: float) -> bool:
        return 0.0 <= self.f1 <= f_max and 0.0 <= self.f2 <= f_max
