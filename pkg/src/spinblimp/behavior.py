"""Random-walk exploration with a spinning time-of-flight ranger.

The ranger looks along the body +y axis and is swept through 360 degrees by
the vehicle's own spin.  The walk itself is a carrot point moving at constant
speed along the walk direction and fed to the position controller; when the
closest return of the last revolution falls below a threshold the vehicle
stops and the direction is mirrored about the struck wall.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .control import Command, Gains, Reference, position_command
from .core import TWO_PI, State, Vec3, VehicleParams

NO_RETURN = math.inf
# slack on the segment parameter so rays through a shared vertex hit one of its walls
_S_EPS = 1e-12


class ScanNotReady(RuntimeError):
    """The scan does not yet cover a full revolution."""


@dataclass(frozen=True)
class Wall:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        vals = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("wall endpoints must be finite")
        if self.length == 0.0:
            raise ValueError("wall has zero length")

    @property
    def length(self) -> float:
        return math.hypot(self.x2 - self.x1, self.y2 - self.y1)

    @property
    def normal(self) -> tuple[float, float]:
        """Unit normal on the left of ``p1 -> p2``.

        For a boundary listed counter-clockwise this points into the room.
        """
        L = self.length
        return (-(self.y2 - self.y1) / L, (self.x2 - self.x1) / L)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class Environment:
    walls: tuple[Wall, ...]

    @classmethod
    def rectangle(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> "Environment":
        c = [(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)]
        return cls(tuple(Wall(*c[i], *c[(i + 1) % 4]) for i in range(4)))

    @classmethod
    def from_segments(cls, segments: Sequence[Sequence[float]]) -> "Environment":
        return cls(tuple(Wall(*map(float, s)) for s in segments))

    def contains(self, point) -> bool:
        """Even-odd test; the walls are treated as closed polygon edges."""
        px, py = point
        inside = False
        for w in self.walls:
            if (w.y1 > py) != (w.y2 > py):
                x_at = w.x1 + (py - w.y1) * (w.x2 - w.x1) / (w.y2 - w.y1)
                if px < x_at:
                    inside = not inside
        return inside

    def raycast(self, origin, yaw: float) -> tuple[float, int]:
        """Distance to the first wall along ``yaw`` and its index (``inf, -1`` if none)."""
        ox, oy = origin
        dx, dy = math.cos(yaw), math.sin(yaw)
        best, idx = math.inf, -1
        for i, w in enumerate(self.walls):
            ex, ey = w.x2 - w.x1, w.y2 - w.y1
            den = _cross(dx, dy, ex, ey)
            if den == 0.0:
                continue  # parallel
            qx, qy = w.x1 - ox, w.y1 - oy
            t = _cross(qx, qy, ex, ey) / den
            s = _cross(qx, qy, dx, dy) / den
            if t > 0.0 and -_S_EPS <= s <= 1.0 + _S_EPS and t < best:
                best, idx = t, i
        return best, idx

    def crosses_wall(self, p, q) -> bool:
        """True if the segment ``p -> q`` intersects any wall."""
        px, py = p
        rx, ry = q[0] - px, q[1] - py
        if rx == 0.0 and ry == 0.0:
            return False
        for w in self.walls:
            ex, ey = w.x2 - w.x1, w.y2 - w.y1
            den = _cross(rx, ry, ex, ey)
            if den == 0.0:
                continue
            qx, qy = w.x1 - px, w.y1 - py
            t = _cross(qx, qy, ex, ey) / den
            s = _cross(qx, qy, rx, ry) / den
            if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
                return True
        return False

    def clearance(self, point) -> float:
        """Shortest distance from ``point`` to any wall."""
        px, py = point
        best = math.inf
        for w in self.walls:
            ex, ey = w.x2 - w.x1, w.y2 - w.y1
            t = ((px - w.x1) * ex + (py - w.y1) * ey) / (ex * ex + ey * ey)
            t = min(1.0, max(0.0, t))
            best = min(best, math.hypot(px - (w.x1 + t * ex), py - (w.y1 + t * ey)))
        return best


def tof_raycast(env: Environment, origin, yaw: float, max_range: float = 2.5) -> float:
    """Range reading along ``yaw``; ``NO_RETURN`` (``inf``) beyond ``max_range``."""
    if not env.contains(origin):
        raise ValueError(f"ray origin {tuple(origin)} is outside the environment")
    d, _ = env.raycast(origin, yaw)
    return d if d <= max_range else NO_RETURN


class Sample(NamedTuple):
    t: float
    yaw: float  # unwrapped
    distance: float
    wall: int


class ToFScan:
    """Samples from the most recent full revolution of the ranger."""

    def __init__(self, max_range: float = 2.5):
        self.max_range = max_range
        self.samples: deque[Sample] = deque()

    def add(self, t: float, yaw: float, distance: float, wall: int = -1) -> None:
        self.samples.append(Sample(t, yaw, distance, wall))
        # keep just enough history to span one turn
        while len(self.samples) > 2 and abs(yaw - self.samples[1].yaw) >= TWO_PI:
            self.samples.popleft()

    @property
    def span(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return abs(self.samples[-1].yaw - self.samples[0].yaw)

    @property
    def ready(self) -> bool:
        return self.span >= TWO_PI

    def max_gap(self) -> float:
        y = np.array([s.yaw for s in self.samples])
        return float(np.max(np.abs(np.diff(y)))) if y.size > 1 else math.inf

    def minimum(self) -> Sample:
        if not self.ready:
            raise ScanNotReady("scan covers less than one revolution")
        best = None
        for s in self.samples:
            if best is None or s.distance <= best.distance:
                best = s
        return best


def min_distance_heading(scan: ToFScan) -> tuple[float, float]:
    """``(yaw, distance)`` of the closest return; ties go to the newest sample."""
    s = scan.minimum()
    return s.yaw, s.distance


def reflect_velocity(v, n) -> tuple[float, float]:
    """Specular reflection ``v - 2 (v . n) n`` about a unit normal ``n``."""
    vx, vy = v
    nx, ny = n
    if abs(math.hypot(nx, ny) - 1.0) > 1e-9:
        raise ValueError("reflection normal must have unit length")
    d = vx * nx + vy * ny
    return (vx - 2.0 * d * nx, vy - 2.0 * d * ny)


@dataclass
class Bounce:
    t: float
    pos: tuple[float, float]
    before: tuple[float, float]
    after: tuple[float, float]
    normal: tuple[float, float]
    distance: float


class RandomWalkPolicy:
    """Bounce-off-the-walls exploration, usable as a ``sim.simulate`` policy."""

    def __init__(self, env: Environment, params: VehicleParams, gains: Gains, speed: float = 0.15,
                 threshold: float = 0.5, sensor_rate: float = 100.0, max_range: float = 2.5,
                 z_d: float = 1.0, sensor_yaw_offset: float = 0.5 * math.pi):
        if not (speed > 0 and threshold > 0 and sensor_rate > 0 and max_range > 0):
            raise ValueError("speed, threshold, sensor_rate and max_range must be > 0")
        gains.check(params)
        self.env = env
        self.params = params
        self.gains = gains
        self.speed = speed
        self.threshold = threshold
        self.sensor_rate = sensor_rate
        self.z_d = z_d
        self.sensor_yaw_offset = sensor_yaw_offset
        self.scan = ToFScan(max_range)
        self.reset(np.random.default_rng(0))

    def reset(self, rng: np.random.Generator) -> None:
        a = rng.uniform(-math.pi, math.pi)
        self.direction = (math.cos(a), math.sin(a))
        self.anchor: Optional[tuple[float, float]] = None
        self.t_anchor = 0.0
        self.scan = ToFScan(self.scan.max_range)
        self.bounces: list[Bounce] = []
        self.max_scan_gap = 0.0
        self._next_sample = 0
        self._yaw_prev: Optional[float] = None
        self._yaw_unwrapped = 0.0

    def _unwrapped_yaw(self, state: State) -> float:
        a = state.att
        if a.planar_yaw is not None:
            return a.planar_yaw
        y = a.yaw
        if self._yaw_prev is not None:
            d = math.remainder(y - self._yaw_prev, TWO_PI)
            self._yaw_unwrapped += d
        else:
            self._yaw_unwrapped = y
        self._yaw_prev = y
        return self._yaw_unwrapped

    def update(self, t: float, state: State) -> None:
        pos = (state.pos.x, state.pos.y)
        if self.anchor is None:
            self.anchor, self.t_anchor = pos, t
        yaw = self._unwrapped_yaw(state)
        if t * self.sensor_rate + 1e-9 >= self._next_sample:
            self._next_sample += 1
            ray = yaw + self.sensor_yaw_offset
            d, wall = self.env.raycast(pos, ray)
            if d > self.scan.max_range:
                d, wall = NO_RETURN, -1
            if self.scan.samples:
                self.max_scan_gap = max(self.max_scan_gap, abs(ray - self.scan.samples[-1].yaw))
            self.scan.add(t, ray, d, wall)
        if not self.scan.ready:
            return
        s = self.scan.minimum()
        if s.distance >= self.threshold or s.wall < 0:
            return
        w = self.env.walls[s.wall]
        nx, ny = w.normal
        if (pos[0] - w.x1) * nx + (pos[1] - w.y1) * ny < 0:
            nx, ny = -nx, -ny  # face the vehicle
        dx, dy = self.direction
        if dx * nx + dy * ny >= 0:
            return  # already moving away from this wall
        new = reflect_velocity(self.direction, (nx, ny))
        self.bounces.append(Bounce(t, pos, self.direction, new, (nx, ny), s.distance))
        self.direction = new
        self.anchor, self.t_anchor = pos, t

    def goal(self, t: float) -> Reference:
        ax, ay = self.anchor if self.anchor is not None else (0.0, 0.0)
        dx, dy = self.direction
        s = self.speed * max(0.0, t - self.t_anchor)
        return Reference(Vec3(ax + dx * s, ay + dy * s, self.z_d), Vec3(dx * self.speed, dy * self.speed, 0.0))

    def __call__(self, t: float, state: State) -> Command:
        return position_command(state, self.goal(t), self.params, self.gains)
