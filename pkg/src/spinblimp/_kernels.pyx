# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels (same API as ``_kernels_py``)."""
import numpy as np

from libc.math cimport cos, sin, fabs, sqrt

NAME = "cython"

cdef enum:
    NP = 18


cdef void _simplified(const double* y, double f1, double f2, const double* p, double* out) noexcept nogil:
    cdef double m = p[0], g = p[1], f_b = p[2], l_m = p[3], k_lift = p[4]
    cdef double d_x = p[5], d_y = p[6], d_z = p[7], d_w = p[8], I_z = p[11]
    cdef double vx = y[3], vy = y[4], vz = y[5], psi = y[6], wz = y[7]
    cdef double df = f1 - f2
    cdef double c = cos(psi), s = sin(psi)
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = (-s * df - d_x * vx * fabs(vx)) / m
    out[4] = (c * df - d_y * vy * fabs(vy)) / m
    out[5] = (f_b - m * g + k_lift * wz * wz - d_z * vz * fabs(vz)) / m
    out[6] = wz
    out[7] = (l_m * (f1 + f2) - d_w * wz * fabs(wz)) / I_z


cdef void _full(const double* y, double f1, double f2, const double* p, double* out) noexcept nogil:
    cdef double m = p[0], g = p[1], f_b = p[2], l_m = p[3], k_lift = p[4]
    cdef double d_x = p[5], d_y = p[6], d_z = p[7], d_w = p[8]
    cdef double I_x = p[9], I_y = p[10], I_z = p[11]
    cdef double pbx = p[12], pby = p[13], pbz = p[14], pgx = p[15], pgy = p[16], pgz = p[17]
    cdef double vx = y[3], vy = y[4], vz = y[5]
    cdef double qw = y[6], qx = y[7], qy = y[8], qz = y[9]
    cdef double wx = y[10], wy = y[11], wz = y[12]

    cdef double r01 = 2 * (qx * qy - qw * qz)
    cdef double r02 = 2 * (qx * qz + qw * qy)
    cdef double r11 = 1 - 2 * (qx * qx + qz * qz)
    cdef double r12 = 2 * (qy * qz - qw * qx)
    cdef double r20 = 2 * (qx * qz - qw * qy)
    cdef double r21 = 2 * (qy * qz + qw * qx)
    cdef double r22 = 1 - 2 * (qx * qx + qy * qy)

    cdef double fy = f1 - f2
    cdef double fz = k_lift * wz * wz
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = (r01 * fy + r02 * fz - d_x * vx * fabs(vx)) / m
    out[4] = (r11 * fy + r12 * fz - d_y * vy * fabs(vy)) / m
    out[5] = (r21 * fy + r22 * fz + f_b - m * g - d_z * vz * fabs(vz)) / m

    cdef double ux = r20, uy = r21, uz = r22
    cdef double fb = f_b, fg = -m * g
    cdef double tx = fb * (pby * uz - pbz * uy) + fg * (pgy * uz - pgz * uy)
    cdef double ty = fb * (pbz * ux - pbx * uz) + fg * (pgz * ux - pgx * uz)
    cdef double tz = fb * (pbx * uy - pby * ux) + fg * (pgx * uy - pgy * ux)
    tz += l_m * (f1 + f2) - d_w * wz * fabs(wz)

    cdef double hx = I_x * wx, hy = I_y * wy, hz = I_z * wz
    out[10] = (tx - (wy * hz - wz * hy)) / I_x
    out[11] = (ty - (wz * hx - wx * hz)) / I_y
    out[12] = (tz - (wx * hy - wy * hx)) / I_z

    out[6] = -0.5 * (qx * wx + qy * wy + qz * wz)
    out[7] = 0.5 * (qw * wx + qy * wz - qz * wy)
    out[8] = 0.5 * (qw * wy - qx * wz + qz * wx)
    out[9] = 0.5 * (qw * wz + qx * wy - qy * wx)


ctypedef void (*deriv_fn)(const double*, double, double, const double*, double*) noexcept nogil


cdef void _rk4(deriv_fn fun, int n, const double* y, double f1, double f2, double dt,
               const double* p, double* out) noexcept nogil:
    cdef double k1[13]
    cdef double k2[13]
    cdef double k3[13]
    cdef double k4[13]
    cdef double tmp[13]
    cdef double h = 0.5 * dt
    cdef double s = dt / 6.0
    cdef int i
    fun(y, f1, f2, p, k1)
    for i in range(n):
        tmp[i] = y[i] + h * k1[i]
    fun(tmp, f1, f2, p, k2)
    for i in range(n):
        tmp[i] = y[i] + h * k2[i]
    fun(tmp, f1, f2, p, k3)
    for i in range(n):
        tmp[i] = y[i] + dt * k3[i]
    fun(tmp, f1, f2, p, k4)
    for i in range(n):
        out[i] = y[i] + s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


cdef double[::1] _as_vec(object a, Py_ssize_t n):
    cdef double[::1] v = np.ascontiguousarray(a, dtype=np.float64)
    if v.shape[0] != n:
        raise ValueError(f"expected length {n}, got {v.shape[0]}")
    return v


def deriv_simplified(y, double f1, double f2, p):
    cdef double[::1] yv = _as_vec(y, 8)
    cdef double[::1] pv = _as_vec(p, NP)
    out = np.empty(8)
    cdef double[::1] ov = out
    _simplified(&yv[0], f1, f2, &pv[0], &ov[0])
    return out


def deriv_full(y, double f1, double f2, p):
    cdef double[::1] yv = _as_vec(y, 13)
    cdef double[::1] pv = _as_vec(p, NP)
    out = np.empty(13)
    cdef double[::1] ov = out
    _full(&yv[0], f1, f2, &pv[0], &ov[0])
    return out


def rk4_simplified(y, double f1, double f2, double dt, p):
    cdef double[::1] yv = _as_vec(y, 8)
    cdef double[::1] pv = _as_vec(p, NP)
    out = np.empty(8)
    cdef double[::1] ov = out
    _rk4(_simplified, 8, &yv[0], f1, f2, dt, &pv[0], &ov[0])
    return out


def rk4_full(y, double f1, double f2, double dt, p):
    cdef double[::1] yv = _as_vec(y, 13)
    cdef double[::1] pv = _as_vec(p, NP)
    out = np.empty(13)
    cdef double[::1] ov = out
    _rk4(_full, 13, &yv[0], f1, f2, dt, &pv[0], &ov[0])
    cdef double n = sqrt(ov[6] * ov[6] + ov[7] * ov[7] + ov[8] * ov[8] + ov[9] * ov[9])
    cdef int i
    for i in range(6, 10):
        ov[i] /= n
    return out
