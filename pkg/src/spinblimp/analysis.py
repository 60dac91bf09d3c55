"""Equilibria, calibration, linearization and Lyapunov monitors."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import ControlInput, State, Vec3, VehicleParams


def hover_omega(params: VehicleParams) -> float:
    """Spin rate whose lift exactly cancels the net negative buoyancy."""
    net = params.m * params.g - params.f_b
    if not net > 0:
        raise ValueError("hover spin is undefined unless m*g > f_b")
    return math.sqrt(net / params.k_lift)


def hover_thrust(params: VehicleParams, omega_z: float | None = None) -> float:
    """Per-motor thrust that balances rotational drag at ``omega_z``."""
    w = hover_omega(params) if omega_z is None else omega_z
    return params.d_w * w * w / (2.0 * params.l_m)


def spin_time_constant(params: VehicleParams, k: float) -> float:
    """Time constant ``I_z / (2 k l_m)`` of the spin-rate loop."""
    return params.I[2] / (2.0 * k * params.l_m)


# ---------------------------------------------------------------------------
# bisection


class BisectionResult(NamedTuple):
    root: float
    iterations: int
    residual: float


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float,
           max_iter: int = 200) -> BisectionResult:
    """Find a sign change of ``f`` in ``[lo, hi]`` to an interval width ``tol``.

    Terminates after at most ``ceil(log2((hi - lo) / tol))`` halvings.
    """
    if not (lo < hi and tol > 0):
        raise ValueError("need lo < hi and tol > 0")
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return BisectionResult(lo, 0, 0.0)
    if f_hi == 0.0:
        return BisectionResult(hi, 0, 0.0)
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError(f"no sign change in bracket [{lo!r}, {hi!r}]")
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        it += 1
        if f_mid == 0.0:
            return BisectionResult(mid, it, 0.0)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    root = 0.5 * (lo + hi)
    return BisectionResult(root, it, f(root))


def steady_vertical_accel(params: VehicleParams, omega_z: float) -> float:
    """Vertical acceleration of a level vehicle at rest spinning at ``omega_z``.

    Both motors supply the thrust that holds the spin rate against drag, so
    only buoyancy, weight and wing lift act vertically.
    """
    from .dynamics import simplified_derivative

    f = params.d_w * omega_z * omega_z / (2.0 * params.l_m)
    s = State.hover(Vec3.zero(), omega_z)
    return simplified_derivative(s, ControlInput(f, f), params).dvel.z


def calibrate_k_lift(params: VehicleParams, omega_z: float, k_lo: float = 1e-6, k_hi: float = 1e-2,
                     tol: float = 1e-13) -> BisectionResult:
    """Bisect for the lift coefficient that holds altitude at spin ``omega_z``."""
    if not params.f_b - params.m * params.g < 0:
        raise ValueError("calibration needs a negatively buoyant vehicle (f_b < m*g)")
    if not omega_z > 0:
        raise ValueError("omega_z must be > 0")

    def accel(k):
        return steady_vertical_accel(dataclasses.replace(params, k_lift=k), omega_z)

    return bisect(accel, k_lo, k_hi, tol)


# ---------------------------------------------------------------------------
# planar linearization


@dataclass(frozen=True)
class OperatingPoint:
    theta_xy0: float = 0.0
    psi0: float = 0.0
    v_xy0: float = 0.0
    psidot0: float = 10.0
    F_xy_des: float = 1.0
    K_D: float = 0.02
    k_F: float = 2.4525e-4


@dataclass(frozen=True)
class PlanarJacobian:
    dxy_dtheta: float
    dxy_dpsi: float
    dxy_dv: float
    dz_dpsidot: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dxy_dtheta, self.dxy_dpsi, self.dxy_dv, self.dz_dpsidot)


def planar_increments(theta_xy: float, psi: float, v_xy: float, psidot: float, op: OperatingPoint,
                      net_buoyancy: float = 0.0) -> tuple[float, float]:
    """Nonlinear planar and vertical force balance ``(d_xy, d_z)``.

    ``net_buoyancy`` is ``f_b - m g``; it shifts ``d_z`` but not its slope.
    """
    d_xy = op.F_xy_des * (math.sin(theta_xy) * math.cos(psi) + math.cos(theta_xy) * math.sin(psi)) \
        - op.K_D * v_xy * v_xy
    d_z = 2.0 * op.k_F * psidot * psidot + net_buoyancy
    return d_xy, d_z


def linearize_planar(op: OperatingPoint) -> PlanarJacobian:
    F, th, ps = op.F_xy_des, op.theta_xy0, op.psi0
    return PlanarJacobian(
        dxy_dtheta=F * (math.cos(th) * math.cos(ps) - math.sin(th) * math.sin(ps)),
        dxy_dpsi=F * (-math.sin(th) * math.sin(ps) + math.cos(th) * math.cos(ps)),
        dxy_dv=-2.0 * op.K_D * op.v_xy0,
        dz_dpsidot=4.0 * op.k_F * op.psidot0,
    )


def central_differences(op: OperatingPoint, h: float, net_buoyancy: float = 0.0) -> PlanarJacobian:
    if not h > 0:
        raise ValueError("h must be > 0")
    th, ps, v, pd = op.theta_xy0, op.psi0, op.v_xy0, op.psidot0

    def dxy(*a):
        return planar_increments(*a, op, net_buoyancy)[0]

    def dz(*a):
        return planar_increments(*a, op, net_buoyancy)[1]

    return PlanarJacobian(
        dxy_dtheta=(dxy(th + h, ps, v, pd) - dxy(th - h, ps, v, pd)) / (2 * h),
        dxy_dpsi=(dxy(th, ps + h, v, pd) - dxy(th, ps - h, v, pd)) / (2 * h),
        dxy_dv=(dxy(th, ps, v + h, pd) - dxy(th, ps, v - h, pd)) / (2 * h),
        dz_dpsidot=(dz(th, ps, v, pd + h) - dz(th, ps, v, pd - h)) / (2 * h),
    )


def _partial_scales(op: OperatingPoint) -> tuple[float, float, float, float]:
    # natural magnitude of each partial; keeps the relative error meaningful
    # where the analytic value passes through zero
    F = abs(op.F_xy_des)
    return (F, F, 2.0 * abs(op.K_D), 4.0 * abs(op.k_F))


def jacobian_errors(op: OperatingPoint, h: float, net_buoyancy: float = 0.0) -> np.ndarray:
    """Per-partial relative error of central differences against ``linearize_planar``.

    Each error is normalised by ``max(|analytic|, scale)`` with ``scale`` the
    magnitude of the partial's coefficient (``|F|``, ``2 K_D``, ``4 k_F``).
    """
    an = np.array(linearize_planar(op).as_tuple())
    fd = np.array(central_differences(op, h, net_buoyancy).as_tuple())
    denom = np.maximum(np.abs(an), _partial_scales(op))
    denom[denom == 0.0] = 1.0
    return np.abs(fd - an) / denom


def finite_difference_check(op: OperatingPoint, h: float = 1e-6, net_buoyancy: float = 0.0) -> float:
    """Largest relative error over the four partials."""
    return float(jacobian_errors(op, h, net_buoyancy).max())


def random_operating_points(n: int, rng: np.random.Generator) -> list[OperatingPoint]:
    return [
        OperatingPoint(
            theta_xy0=rng.uniform(-math.pi, math.pi),
            psi0=rng.uniform(-math.pi, math.pi),
            v_xy0=rng.uniform(-1.0, 1.0),
            psidot0=rng.uniform(-15.0, 15.0),
            F_xy_des=rng.uniform(0.01, 1.0),
            K_D=rng.uniform(0.005, 0.5),
            k_F=rng.uniform(1e-5, 1e-2),
        )
        for _ in range(n)
    ]


def fd_convergence_order(ops: Sequence[OperatingPoint], h: float = 1e-2) -> float:
    """Observed order of the central differences from steps ``h`` and ``h/2``.

    Only the two trigonometric partials carry truncation error; the velocity
    and spin partials differentiate quadratics, which central differences
    reproduce exactly.
    """
    e1 = e2 = 0.0
    for op in ops:
        an = linearize_planar(op)
        a, b = central_differences(op, h), central_differences(op, 0.5 * h)
        e1 += abs(a.dxy_dtheta - an.dxy_dtheta) + abs(a.dxy_dpsi - an.dxy_dpsi)
        e2 += abs(b.dxy_dtheta - an.dxy_dtheta) + abs(b.dxy_dpsi - an.dxy_dpsi)
    return math.log2(e1 / e2)


# ---------------------------------------------------------------------------
# closed forms and Lyapunov monitors


def omega_convergence_analytic(t, omega0: float, omega_star: float, k: float, l_m: float, I_z: float):
    """Spin rate of the closed spin loop, ``w* + (w0 - w*) exp(-2 k l_m t / I_z)``."""
    if not I_z > 0:
        raise ValueError("I_z must be > 0")
    return omega_star + (omega0 - omega_star) * np.exp(-2.0 * k * l_m * np.asarray(t) / I_z)


def lyapunov_z_value(e_z: float, de_z: float, params: VehicleParams, gains) -> float:
    return 0.5 * gains.K_p * e_z * e_z + 0.5 * params.m * de_z * de_z


def lyapunov_z(e_z: float, de_z: float, params: VehicleParams, gains) -> tuple[float, float]:
    """Height-error energy ``V`` and its rate along the ideal closed loop.

    ``V = K_p e^2 / 2 + m de^2 / 2`` and ``dV/dt = -K_d de^2 - d_z de^2 |de|``.
    """
    V = lyapunov_z_value(e_z, de_z, params, gains)
    Vdot = -gains.K_d * de_z * de_z - params.d_z * de_z * de_z * abs(de_z)
    return V, Vdot


def lyapunov_xy(e_xy, de_xy) -> float:
    ex, ey = e_xy
    dex, dey = de_xy
    return 0.5 * (ex * ex + ey * ey) + 0.5 * (dex * dex + dey * dey)


def ultimate_bound(values, trailing: float = 0.2) -> float:
    """Supremum over the trailing fraction of a monitored sequence."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("empty sequence")
    start = min(int(math.floor((1.0 - trailing) * v.size)), v.size - 1)
    return float(np.max(v[start:]))


@dataclass
class HeightResponse:
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    V: np.ndarray
    Vdot: np.ndarray
    saturated: np.ndarray


def height_step_response(params: VehicleParams, gains, z0: float = 0.0, z_d: float = 1.0,
                         duration: float = 20.0, dt: float = 1e-3) -> HeightResponse:
    """Height loop with the spin rate at its setpoint (the ideal inner loop).

    Integrates ``m z'' = f_b - m g - d_z z'|z'| + k_lift w*^2`` with RK4 and
    the setpoint law, for a constant target ``z_d``, and evaluates the
    Lyapunov monitor at every step.
    """
    m, k_lift, d_z = params.m, params.k_lift, params.d_z
    net = params.f_b - m * params.g

    def lift(z, v):
        w2 = (-net + gains.K_p * (z_d - z) + gains.K_d * (0.0 - v)) / k_lift
        return (k_lift * w2, False) if w2 >= 0 else (0.0, True)

    def f(z, v):
        L, _ = lift(z, v)
        return v, (net - d_z * v * abs(v) + L) / m

    n = int(round(duration / dt))
    t = np.arange(n + 1) * dt
    z = np.empty(n + 1)
    v = np.empty(n + 1)
    sat = np.zeros(n + 1, dtype=bool)
    z[0], v[0] = z0, 0.0
    for i in range(n):
        zi, vi = z[i], v[i]
        sat[i] = lift(zi, vi)[1]
        a1, b1 = f(zi, vi)
        a2, b2 = f(zi + 0.5 * dt * a1, vi + 0.5 * dt * b1)
        a3, b3 = f(zi + 0.5 * dt * a2, vi + 0.5 * dt * b2)
        a4, b4 = f(zi + dt * a3, vi + dt * b3)
        z[i + 1] = zi + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        v[i + 1] = vi + dt / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4)
    sat[n] = lift(z[n], v[n])[1]
    e, de = z_d - z, -v
    V, Vdot = lyapunov_z(e, de, params, gains)
    return HeightResponse(t, z, v, np.asarray(V), np.asarray(Vdot), sat)
