"""Simulator and controllers for a two-motor spinning blimp."""
from .core import Attitude, ControlInput, State, Vec3, VehicleParams
from .kernels import BACKEND

__all__ = ["Attitude", "ControlInput", "State", "Vec3", "VehicleParams", "BACKEND"]
__version__ = "0.1.0"
