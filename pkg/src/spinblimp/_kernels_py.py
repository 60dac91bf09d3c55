"""Pure-Python integration kernels.

Reference twin of ``_kernels.pyx``; both expose the same four functions and
must agree to round-off.  ``p`` is ``VehicleParams.packed``:

    [m, g, f_b, l_m, k_lift, d_x, d_y, d_z, d_w, Ix, Iy, Iz, pbx, pby, pbz, pgx, pgy, pgz]
"""
import math

import numpy as np

NAME = "python"


def _simplified(y, f1, f2, p):
    m, g, f_b, l_m, k_lift, d_x, d_y, d_z, d_w = p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8]
    I_z = p[11]
    vx, vy, vz, psi, wz = y[3], y[4], y[5], y[6], y[7]
    df = f1 - f2
    c, s = math.cos(psi), math.sin(psi)
    ax = (-s * df - d_x * vx * abs(vx)) / m
    ay = (c * df - d_y * vy * abs(vy)) / m
    az = (f_b - m * g + k_lift * wz * wz - d_z * vz * abs(vz)) / m
    dwz = (l_m * (f1 + f2) - d_w * wz * abs(wz)) / I_z
    return [vx, vy, vz, ax, ay, az, wz, dwz]


def _full(y, f1, f2, p):
    m, g, f_b, l_m, k_lift, d_x, d_y, d_z, d_w = p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8]
    I_x, I_y, I_z = p[9], p[10], p[11]
    pbx, pby, pbz, pgx, pgy, pgz = p[12], p[13], p[14], p[15], p[16], p[17]
    vx, vy, vz = y[3], y[4], y[5]
    qw, qx, qy, qz = y[6], y[7], y[8], y[9]
    wx, wy, wz = y[10], y[11], y[12]

    # body -> world rotation (the first column is not needed: no body-x force)
    r01 = 2 * (qx * qy - qw * qz)
    r02 = 2 * (qx * qz + qw * qy)
    r11 = 1 - 2 * (qx * qx + qz * qz)
    r12 = 2 * (qy * qz - qw * qx)
    r20 = 2 * (qx * qz - qw * qy)
    r21 = 2 * (qy * qz + qw * qx)
    r22 = 1 - 2 * (qx * qx + qy * qy)

    # body-frame motor + lift force [0, f1 - f2, k w_z^2]
    fy = f1 - f2
    fz = k_lift * wz * wz
    ax = (r01 * fy + r02 * fz - d_x * vx * abs(vx)) / m
    ay = (r11 * fy + r12 * fz - d_y * vy * abs(vy)) / m
    az = (r21 * fy + r22 * fz + f_b - m * g - d_z * vz * abs(vz)) / m

    # world z axis expressed in body (third row of R)
    ux, uy, uz = r20, r21, r22
    fb, fg = f_b, -m * g
    tx = fb * (pby * uz - pbz * uy) + fg * (pgy * uz - pgz * uy)
    ty = fb * (pbz * ux - pbx * uz) + fg * (pgz * ux - pgx * uz)
    tz = fb * (pbx * uy - pby * ux) + fg * (pgx * uy - pgy * ux)
    tz += l_m * (f1 + f2) - d_w * wz * abs(wz)

    hx, hy, hz = I_x * wx, I_y * wy, I_z * wz
    dwx = (tx - (wy * hz - wz * hy)) / I_x
    dwy = (ty - (wz * hx - wx * hz)) / I_y
    dwz = (tz - (wx * hy - wy * hx)) / I_z

    dqw = -0.5 * (qx * wx + qy * wy + qz * wz)
    dqx = 0.5 * (qw * wx + qy * wz - qz * wy)
    dqy = 0.5 * (qw * wy - qx * wz + qz * wx)
    dqz = 0.5 * (qw * wz + qx * wy - qy * wx)
    return [vx, vy, vz, ax, ay, az, dqw, dqx, dqy, dqz, dwx, dwy, dwz]


def deriv_simplified(y, f1, f2, p):
    return np.array(_simplified(y, f1, f2, p))


def deriv_full(y, f1, f2, p):
    return np.array(_full(y, f1, f2, p))


def _rk4(fun, y, f1, f2, dt, p):
    y = [float(v) for v in y]
    p = [float(v) for v in p]
    n = len(y)
    h = 0.5 * dt
    k1 = fun(y, f1, f2, p)
    k2 = fun([y[i] + h * k1[i] for i in range(n)], f1, f2, p)
    k3 = fun([y[i] + h * k2[i] for i in range(n)], f1, f2, p)
    k4 = fun([y[i] + dt * k3[i] for i in range(n)], f1, f2, p)
    s = dt / 6.0
    return [y[i] + s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(n)]


def rk4_simplified(y, f1, f2, dt, p):
    return np.array(_rk4(_simplified, y, f1, f2, dt, p))


def rk4_full(y, f1, f2, dt, p):
    out = _rk4(_full, y, f1, f2, dt, p)
    n = math.sqrt(out[6] ** 2 + out[7] ** 2 + out[8] ** 2 + out[9] ** 2)
    for i in range(6, 10):
        out[i] /= n
    return np.array(out)
