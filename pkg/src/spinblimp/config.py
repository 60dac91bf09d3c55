"""Run configuration: a flat ``section.key = value`` text format.

One assignment per line, ``#`` starts a comment, blank lines are ignored.
Every key has a default, so an empty file is a valid hover run.  Vector
values are comma separated (``vehicle.I = 2e-3, 2e-3, 3.5e-3``) and walls of
the random-walk room are given as ``env.wall.N = x1, y1, x2, y2``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Optional

from .analysis import OperatingPoint
from .behavior import Environment
from .control import Gains
from .core import VehicleParams
from .sim import SimConfig

EXPERIMENTS = ("hover", "triangle", "lissajous", "randomwalk", "analyze")


class ConfigError(ValueError):
    """Malformed line or invalid value; the message names the line or key."""


@dataclass(frozen=True)
class HoverSpec:
    x0: float = 0.0
    y0: float = 0.0
    z_d: float = 1.0


@dataclass(frozen=True)
class TriangleSpec:
    side: float = 2.0
    speed: float = 0.10
    direction: str = "ccw"
    center_x: float = 0.0
    center_y: float = 0.0
    z_d: float = 1.0
    loops: float = 1.0


@dataclass(frozen=True)
class LissajousSpec:
    A: float = 4.0
    B: float = 2.0
    a: float = 1.0
    b: float = 2.0
    delta_x: float = 0.5 * math.pi
    delta_y: float = 0.0
    z_d: float = 1.0
    # mean path speed; when > 0 the time scale is calibrated to it
    speed: float = 0.13
    speed_scale: float = 1.0
    periods: float = 1.0


@dataclass(frozen=True)
class RandomWalkSpec:
    speed: float = 0.15
    threshold: float = 0.5
    sensor_rate: float = 100.0
    max_range: float = 2.5
    z_d: float = 1.0
    # spin rate to hover at; when > 0, k_lift is recalibrated for it
    spin_rate: float = 4.0 * math.pi
    x0: float = 0.0
    y0: float = 0.0


@dataclass(frozen=True)
class OutputSpec:
    plot_stride: int = 10


@dataclass(frozen=True)
class RunConfig:
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    gains: Gains = field(default_factory=Gains)
    sim: SimConfig = field(default_factory=SimConfig)
    experiment: str = "hover"
    hover: HoverSpec = field(default_factory=HoverSpec)
    triangle: TriangleSpec = field(default_factory=TriangleSpec)
    lissajous: LissajousSpec = field(default_factory=LissajousSpec)
    randomwalk: RandomWalkSpec = field(default_factory=RandomWalkSpec)
    env: Environment = field(default_factory=lambda: Environment.rectangle(-3.0, -2.0, 3.0, 2.0))
    op: OperatingPoint = field(default_factory=OperatingPoint)
    op_h: float = 1e-6
    output: OutputSpec = field(default_factory=OutputSpec)
    # True when sim.duration was given explicitly
    duration_set: bool = False


_SECTIONS: dict[str, type] = {
    "vehicle": VehicleParams,
    "gains": Gains,
    "sim": SimConfig,
    "hover": HoverSpec,
    "triangle": TriangleSpec,
    "lissajous": LissajousSpec,
    "randomwalk": RandomWalkSpec,
    "op": OperatingPoint,
    "output": OutputSpec,
}
_HIDDEN = {("vehicle", "strict")}
_LINE = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")


def _vector(n: int) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        return tuple(float(p) for p in parts)
    return parse


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _parser_for(section: str, name: str, default: Any) -> Callable[[str], Any]:
    if section == "vehicle" and name in ("I", "p_b", "p_g"):
        return _vector(3)
    if isinstance(default, bool):
        return _bool
    if isinstance(default, int):
        return int
    if isinstance(default, float):
        return float
    return str


def _known_keys() -> dict[str, Callable[[str], Any]]:
    keys: dict[str, Callable[[str], Any]] = {"experiment.name": str, "op.h": float}
    for section, cls in _SECTIONS.items():
        proto = cls()
        for f in fields(cls):
            if (section, f.name) in _HIDDEN:
                continue
            keys[f"{section}.{f.name}"] = _parser_for(section, f.name, getattr(proto, f.name))
    return keys


KNOWN_KEYS = _known_keys()


def parse_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse config text into ``{dotted_key: value}``; raises ``ConfigError``."""
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m is None:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, value = m.group(1), m.group(2).strip()
        if key.startswith("env.wall."):
            idx = key[len("env.wall."):]
            if not idx.isdigit():
                raise ConfigError(f"{source}:{lineno}: wall key must be env.wall.N (got {key!r})")
            parse = _vector(4)
        elif key in KNOWN_KEYS:
            parse = KNOWN_KEYS[key]
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    return values


def build_config(values: dict[str, Any], overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """Turn parsed values (plus CLI overrides, same dotted keys) into a ``RunConfig``."""
    values = dict(values)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    experiment = values.get("experiment.name", "hover")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment.name must be one of {EXPERIMENTS} (got {experiment!r})")

    vehicle = _build_checked("vehicle", VehicleParams, values)
    gains = _build_checked("gains", Gains, values)
    try:
        gains.check(vehicle)
    except ValueError as exc:
        raise ConfigError(f"gains.tau: {exc}") from None

    specs = {name: _build_checked(name, _SECTIONS[name], values)
             for name in ("hover", "triangle", "lissajous", "randomwalk", "op", "output")}
    if specs["triangle"].direction not in ("cw", "ccw"):
        raise ConfigError(f"triangle.direction must be 'cw' or 'ccw' (got {specs['triangle'].direction!r})")
    if specs["output"].plot_stride < 1:
        raise ConfigError("output.plot_stride must be >= 1")
    op_h = values.get("op.h", 1e-6)
    if not op_h > 0:
        raise ConfigError(f"op.h must be > 0 (got {op_h!r})")

    walls = sorted((int(k.rsplit(".", 1)[1]), v) for k, v in values.items() if k.startswith("env.wall."))
    try:
        env = Environment.from_segments([w for _, w in walls]) if walls else RunConfig().env
    except ValueError as exc:
        raise ConfigError(f"env.wall: {exc}") from None

    sim_vals = {k: v for k, v in values.items() if k.startswith("sim.")}
    duration_set = "sim.duration" in sim_vals
    if not duration_set:
        sim_vals["sim.duration"] = max(1.0, sim_vals.get("sim.dt", 0.0))  # placeholder, replaced by the experiment default
    sim = _build_checked("sim", SimConfig, sim_vals)
    return RunConfig(vehicle, gains, sim, experiment, specs["hover"], specs["triangle"], specs["lissajous"],
                     specs["randomwalk"], env, specs["op"], op_h, specs["output"], duration_set)


def _build_checked(section: str, cls: type, values: dict[str, Any]):
    kw = {k.split(".", 1)[1]: v for k, v in values.items() if k.split(".", 1)[0] == section and k != "op.h"}
    # validate one key at a time against the defaults so the message names it
    proto = cls()
    for name, v in kw.items():
        try:
            replace(proto, **{name: v})
        except ValueError as exc:
            raise ConfigError(f"{section}.{name}: {exc}") from None
    try:
        return cls(**kw)
    except ValueError as exc:
        names = ", ".join(f"{section}.{k}" for k in sorted(kw)) or section
        raise ConfigError(f"{names}: {exc}") from None


def load_config(path, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """Read and validate a config file.

    Raises ``ConfigError`` with a line number for syntax problems and with
    the key name for values that break an invariant.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(p)!r}: {exc.strerror}") from None
    return build_config(parse_text(text, str(p)), overrides)
