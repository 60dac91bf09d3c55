"""Independent reference implementations used only by the tests.

They are written directly from the equations of motion with plain numpy and
share no code with the package.
"""
import math

import numpy as np


def rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def ry(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def euler_matrix(roll, pitch, yaw):
    return rz(yaw) @ ry(pitch) @ rx(roll)


def newton_euler(R, vel, omega, f1, f2, P):
    """Full-model accelerations ``(dvel, domega)`` from the rotation matrix ``R``.

    ``P`` is a dict of physical constants.  Drag acts on world velocity.
    """
    m, g = P["m"], P["g"]
    Ab = np.array([0.0, f1 - f2, 0.0])
    lift = np.array([0.0, 0.0, P["k_lift"] * omega[2] ** 2])
    f_bg = np.array([0.0, 0.0, P["f_b"] - m * g])
    d = np.array([P["d_x"], P["d_y"], P["d_z"]])
    f_d = -d * vel * np.abs(vel)
    dvel = (R @ Ab + f_bg + R @ lift + f_d) / m
    # motor torque from the two thrust application points
    p1 = np.array([P["l_m"], 0.0, 0.0])
    p2 = np.array([-P["l_m"], 0.0, 0.0])
    tau_m = np.cross(p1, [0.0, f1, 0.0]) + np.cross(p2, [0.0, -f2, 0.0])
    up_b = R.T @ np.array([0.0, 0.0, 1.0])
    tau_bg = np.cross(P["p_b"], P["f_b"] * up_b) + np.cross(P["p_g"], -m * g * up_b)
    tau_d = np.array([0.0, 0.0, -P["d_w"] * omega[2] * abs(omega[2])])
    I = np.diag(P["I"])
    domega = np.linalg.solve(I, tau_m + tau_bg + tau_d - np.cross(omega, I @ omega))
    return dvel, domega


def params_dict(p):
    return dict(m=p.m, g=p.g, f_b=p.f_b, l_m=p.l_m, k_lift=p.k_lift, d_x=p.d_x, d_y=p.d_y, d_z=p.d_z,
                d_w=p.d_w, I=np.array(p.I), p_b=np.array(p.p_b), p_g=np.array(p.p_g))


def march_ray(walls, origin, yaw, step=1e-4, limit=10.0):
    """First distance along the ray at which a wall lies within ``step``.

    Brute-force sampling; accurate to about ``step``.
    """
    o = np.asarray(origin, float)
    d = np.array([math.cos(yaw), math.sin(yaw)])
    n = int(limit / step)
    s = np.arange(1, n + 1) * step
    pts = o + s[:, None] * d
    best = math.inf
    for (x1, y1, x2, y2) in walls:
        a = np.array([x1, y1])
        e = np.array([x2 - x1, y2 - y1])
        t = np.clip(((pts - a) @ e) / (e @ e), 0.0, 1.0)
        dist = np.linalg.norm(pts - (a + t[:, None] * e), axis=1)
        hit = np.nonzero(dist <= 0.5 * step)[0]
        if hit.size:
            best = min(best, s[hit[0]])
    return best


def rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
