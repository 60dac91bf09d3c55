"""Reference trajectories (triangle loop, Lissajous curve) and tracking metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from .analysis import bisect
from .control import Reference
from .core import Vec3


@dataclass(frozen=True)
class LissajousParams:
    A: float = 4.0
    B: float = 2.0
    a: float = 1.0
    b: float = 2.0
    delta_x: float = 0.5 * math.pi
    delta_y: float = 0.0
    z_d: float = 1.0
    speed_scale: float = 1.0

    def __post_init__(self):
        if not (self.A >= 0 and self.B >= 0):
            raise ValueError("amplitudes must be >= 0")
        if not self.speed_scale > 0:
            raise ValueError("speed_scale must be > 0")

    @property
    def scaled_period(self) -> float:
        """Period of the curve in scaled time (``a`` and ``b`` must be commensurate)."""
        fa = Fraction(self.a).limit_denominator(1000)
        fb = Fraction(self.b).limit_denominator(1000)
        if fa == 0 and fb == 0:
            return 2.0 * math.pi
        if fa == 0 or fb == 0:
            return 2.0 * math.pi / float(abs(fa or fb))
        # gcd of two rationals p1/q1, p2/q2 is gcd(p1 q2, p2 q1) / (q1 q2)
        num = math.gcd(abs(fa.numerator * fb.denominator), abs(fb.numerator * fa.denominator))
        g = Fraction(num, fa.denominator * fb.denominator)
        return 2.0 * math.pi / float(g)

    @property
    def period(self) -> float:
        return self.scaled_period / self.speed_scale


def lissajous_ref(t: float, p: LissajousParams) -> Reference:
    c = p.speed_scale
    s = c * t
    px, py = p.a * s + p.delta_x, p.b * s + p.delta_y
    return Reference(
        Vec3(p.A * math.sin(px), p.B * math.sin(py), p.z_d),
        Vec3(p.A * p.a * c * math.cos(px), p.B * p.b * c * math.cos(py), 0.0),
        0.0,
    )


def lissajous_arc_length(p: LissajousParams) -> float:
    """Arc length of one period of the curve."""

    def speed(s):
        return math.hypot(p.A * p.a * math.cos(p.a * s + p.delta_x), p.B * p.b * math.cos(p.b * s + p.delta_y))

    P = p.scaled_period
    # split at a fine grid so quad sees smooth pieces
    edges = np.linspace(0.0, P, 33)
    return sum(integrate.quad(speed, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
               for lo, hi in zip(edges[:-1], edges[1:]))


def lissajous_average_speed(p: LissajousParams) -> float:
    return lissajous_arc_length(p) / p.period


def calibrate_speed_scale(p: LissajousParams, target_speed: float, lo: float = 1e-6, hi: float = 10.0,
                          tol: float = 1e-12) -> LissajousParams:
    """Return ``p`` with ``speed_scale`` chosen so the mean path speed is ``target_speed``."""
    if not target_speed > 0:
        raise ValueError("target_speed must be > 0")
    L = lissajous_arc_length(p)
    P = p.scaled_period
    res = bisect(lambda c: L * c / P - target_speed, lo, hi, tol)
    return LissajousParams(p.A, p.B, p.a, p.b, p.delta_x, p.delta_y, p.z_d, res.root)


@dataclass(frozen=True)
class TriangleParams:
    vertices: tuple[Vec3, Vec3, Vec3]
    speed: float = 0.10
    direction: str = "ccw"

    def __post_init__(self):
        if len(self.vertices) != 3:
            raise ValueError("a triangle needs three vertices")
        if not self.speed > 0:
            raise ValueError("speed must be > 0")
        if self.direction not in ("cw", "ccw"):
            raise ValueError("direction must be 'cw' or 'ccw'")
        a, b, c = self.vertices
        area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
        if abs(area2) < 1e-12:
            raise ValueError("triangle vertices are collinear")

    @classmethod
    def equilateral(cls, side: float = 2.0, center=(0.0, 0.0), z: float = 1.0, speed: float = 0.10,
                    direction: str = "ccw") -> "TriangleParams":
        r = side / math.sqrt(3.0)
        verts = tuple(
            Vec3(center[0] + r * math.cos(th), center[1] + r * math.sin(th), z)
            for th in (0.5 * math.pi, 0.5 * math.pi + 2 * math.pi / 3, 0.5 * math.pi + 4 * math.pi / 3)
        )
        return cls(verts, speed, direction)

    def loop(self) -> list[Vec3]:
        """Vertices in traversal order."""
        a, b, c = self.vertices
        ccw = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) > 0
        if ccw == (self.direction == "ccw"):
            return [a, b, c]
        return [a, c, b]

    @property
    def perimeter(self) -> float:
        v = self.loop()
        return sum((v[(i + 1) % 3] - v[i]).norm() for i in range(3))

    @property
    def period(self) -> float:
        return self.perimeter / self.speed


def triangle_ref(t: float, p: TriangleParams) -> Reference:
    verts = p.loop()
    s = math.fmod(p.speed * t, p.perimeter)
    for i in range(3):
        a, b = verts[i], verts[(i + 1) % 3]
        d = b - a
        L = d.norm()
        if s < L or i == 2:
            s = min(s, L)
            u = d * (1.0 / L)
            return Reference(a + u * s, u * p.speed, 0.0)
        s -= L
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# metrics


def _errors(log) -> np.ndarray:
    if hasattr(log, "column"):
        e = log.column("e")
    elif isinstance(log, dict):
        e = np.asarray(log["e"], dtype=float)
    else:
        e = np.asarray([getattr(r, "e", r) for r in log], dtype=float)
    e = e[np.isfinite(e)]
    if e.size == 0:
        raise ValueError("tracking metrics need a non-empty log with a reference")
    return e


def tracking_metrics(log) -> dict[str, float]:
    """Mean, max and RMS of the logged position error ``e``.

    Accepts a ``SimResult``, a ``{column: array}`` mapping (as read from CSV)
    or any sequence of rows or error values.
    """
    e = _errors(log)
    return {
        "mean_e": float(np.mean(e)),
        "max_e": float(np.max(e)),
        "rmse": float(np.sqrt(np.mean(e * e))),
    }


def lissajous_cross_track(xs: Sequence[float], ys: Sequence[float], p: LissajousParams,
                          samples: int = 20000, min_curvature: float = 0.1) -> dict[str, float]:
    """Mean signed cross-track offset on the clockwise and counter-clockwise arcs.

    Each position is matched to its nearest point on the curve.  Positive
    offsets lie outside the local curve (away from the centre of curvature).
    Points where the curve's curvature magnitude is below ``min_curvature``
    times its maximum (near inflections) are ignored.
    """
    s = np.linspace(0.0, p.scaled_period, samples, endpoint=False)
    px = p.A * np.sin(p.a * s + p.delta_x)
    py = p.B * np.sin(p.b * s + p.delta_y)
    dx = p.A * p.a * np.cos(p.a * s + p.delta_x)
    dy = p.B * p.b * np.cos(p.b * s + p.delta_y)
    ddx = -p.A * p.a * p.a * np.sin(p.a * s + p.delta_x)
    ddy = -p.B * p.b * p.b * np.sin(p.b * s + p.delta_y)
    sp = np.hypot(dx, dy)
    kappa = (dx * ddy - dy * ddx) / sp ** 3
    # left normal of the unit tangent
    nx, ny = -dy / sp, dx / sp

    q = np.column_stack([np.asarray(xs, float), np.asarray(ys, float)])
    _, idx = cKDTree(np.column_stack([px, py])).query(q)
    off = (q[:, 0] - px[idx]) * nx[idx] + (q[:, 1] - py[idx]) * ny[idx]
    k = kappa[idx]
    outward = -np.sign(k) * off
    keep = np.abs(k) >= min_curvature * np.max(np.abs(kappa))
    ccw = keep & (k > 0)
    cw = keep & (k < 0)
    return {
        "ccw": float(np.mean(outward[ccw])) if ccw.any() else math.nan,
        "cw": float(np.mean(outward[cw])) if cw.any() else math.nan,
    }
