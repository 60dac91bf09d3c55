import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinblimp.analysis import (OperatingPoint, bisect, calibrate_k_lift, central_differences, finite_difference_check,
                                fd_convergence_order, height_step_response, hover_omega, hover_thrust,
                                jacobian_errors, linearize_planar, lyapunov_xy, lyapunov_z,
                                omega_convergence_analytic, random_operating_points, spin_time_constant,
                                steady_vertical_accel, ultimate_bound)
from spinblimp.control import Gains, PositionController, fixed_reference
from spinblimp.core import State, Vec3, VehicleParams
from spinblimp.sim import SimConfig, simulate

P = VehicleParams()
G = Gains()


def test_hover_omega_examples():
    assert hover_omega(P) == pytest.approx(10.0, abs=1e-9)
    assert hover_omega(dataclasses.replace(P, k_lift=4 * P.k_lift)) == pytest.approx(5.0, abs=1e-9)
    assert hover_thrust(P) == pytest.approx(1e-4 * 100 / 0.7, rel=1e-12)
    assert spin_time_constant(P, 0.02) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        hover_omega(VehicleParams(f_b=P.m * P.g, strict=False))


def test_hover_has_zero_vertical_acceleration():
    assert abs(steady_vertical_accel(P, hover_omega(P))) < 1e-9


def test_calibrate_k_lift():
    res = calibrate_k_lift(P, 10.0)
    assert res.root == pytest.approx(4.905e-4, abs=1e-9)
    assert abs(steady_vertical_accel(dataclasses.replace(P, k_lift=res.root), 10.0)) < 1e-8
    assert res.iterations <= math.ceil(math.log2((1e-2 - 1e-6) / 1e-13))
    with pytest.raises(ValueError):
        calibrate_k_lift(VehicleParams(f_b=P.m * P.g, strict=False), 10.0)


def test_bisect_errors_and_bound():
    with pytest.raises(ValueError):
        bisect(lambda x: x * x + 1, -1.0, 1.0, 1e-9)
    res = bisect(lambda x: x ** 3 - 2, 0.0, 2.0, 1e-12)
    assert res.root == pytest.approx(2 ** (1 / 3), abs=1e-12)
    assert res.iterations <= math.ceil(math.log2(2.0 / 1e-12))


def test_linearization_examples():
    assert linearize_planar(OperatingPoint(k_F=0.01, psidot0=10.0)).dz_dpsidot == pytest.approx(0.4)
    assert linearize_planar(OperatingPoint(K_D=0.2, v_xy0=0.5)).dxy_dv == pytest.approx(-0.2)
    j = linearize_planar(OperatingPoint(theta_xy0=0, psi0=0, F_xy_des=1.0))
    assert j.dxy_dtheta == 1.0 and j.dxy_dpsi == 1.0


def test_fd_matches_analytic_at_origin():
    op = OperatingPoint(theta_xy0=0, psi0=0, v_xy0=0)
    fd, an = central_differences(op, 1e-6).as_tuple(), linearize_planar(op).as_tuple()
    np.testing.assert_allclose(fd, an, rtol=1e-9, atol=1e-15)


def test_fd_check_random_points():
    ops = random_operating_points(200, np.random.default_rng(11))
    assert max(finite_difference_check(op, 1e-6) for op in ops) < 1e-6


def test_fd_error_is_second_order():
    ops = random_operating_points(200, np.random.default_rng(12))
    e1 = sum(jacobian_errors(op, 1e-2)[:2].sum() for op in ops)
    e2 = sum(jacobian_errors(op, 5e-3)[:2].sum() for op in ops)
    assert e1 / e2 == pytest.approx(4.0, rel=0.05)
    assert fd_convergence_order(ops) == pytest.approx(2.0, abs=0.1)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1), st.floats(-15, 15))
def test_net_buoyancy_offset_does_not_change_slopes(th, ps, v, pd):
    op = OperatingPoint(th, ps, v, pd)
    a = central_differences(op, 1e-4).as_tuple()
    b = central_differences(op, 1e-4, net_buoyancy=-0.049).as_tuple()
    np.testing.assert_allclose(a, b, rtol=1e-6, atol=1e-9)


def test_omega_closed_form_examples():
    args = dict(omega0=8.0, omega_star=12.0, k=0.02, l_m=0.35, I_z=3.5e-3)
    assert omega_convergence_analytic(0.0, **args) == 8.0
    assert omega_convergence_analytic(1e3, **args) == pytest.approx(12.0)
    half = math.log(2) * 3.5e-3 / (2 * 0.02 * 0.35)
    assert omega_convergence_analytic(half, **args) == pytest.approx(10.0)


def test_lyapunov_examples():
    assert lyapunov_z(0.0, 0.0, P, G) == (0.0, 0.0)
    V, Vdot = lyapunov_z(1.0, 0.0, P, G)
    assert V == pytest.approx(0.5 * G.K_p) and Vdot == 0.0
    assert lyapunov_xy((0, 0), (0, 0)) == 0.0
    assert lyapunov_xy((3, 4), (0, 0)) == 12.5


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_lyapunov_z_signs(e, de):
    V, Vdot = lyapunov_z(e, de, P, G)
    assert V >= 0 and Vdot <= 0


def test_height_response_derivative_matches_formula():
    r = height_step_response(P, G, duration=10.0)
    dV = np.gradient(r.V, r.t)
    inner = slice(1, -1)
    assert not r.saturated.any()
    assert np.max(np.abs(dV[inner] - r.Vdot[inner])) < 1e-4


def test_ultimate_bound():
    assert ultimate_bound(np.arange(10.0)) == 9.0
    assert ultimate_bound([5, 1, 1, 1, 1, 1, 1, 1, 1, 2]) == 2.0
    with pytest.raises(ValueError):
        ultimate_bound([])


def test_xy_error_ultimately_bounded_from_three_metres():
    goal = Vec3(3.0, 0.0, 1.0)
    res = simulate(State.hover(Vec3(0, 0, 1), hover_omega(P)), PositionController(fixed_reference(goal), P, G),
                   SimConfig(duration=120.0), P)
    V = res.column("V_xy")
    bound = ultimate_bound(V)
    assert math.isfinite(bound) and bound < V[0]
    e_xy = np.hypot(res.column("xd") - res.column("x"), res.column("yd") - res.column("y"))
    # overshoot margin: kinetic energy gained under 2 tau stopped by 2 tau
    assert e_xy.max() <= 3.0 + 1e-9
    tail = e_xy[int(0.6 * len(e_xy)):]
    half = len(tail) // 2
    assert tail[half:].max() <= tail[:half].max() + 1e-3
