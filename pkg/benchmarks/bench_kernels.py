"""Compare the compiled and pure-Python dynamics kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times single derivative and RK4 calls for both models, then a 20 s hover
simulation end to end, and checks that both backends agree.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from spinblimp import kernels
from spinblimp.analysis import hover_omega
from spinblimp.control import Gains, HeightController, fixed_reference
from spinblimp.core import Attitude, State, Vec3, VehicleParams
from spinblimp.sim import SimConfig, simulate


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20000)
    args = ap.parse_args()
    try:
        kernels.get("full", "cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    p = VehicleParams()
    pk = p.packed
    w = hover_omega(p)
    s = State(Vec3(0.1, -0.2, 1.0), Vec3(0.05, 0.02, -0.01), Attitude.from_euler(0.02, -0.01, 0.4), Vec3(0.01, 0.0, w))
    print(f"{'kernel':<22}{'python us':>12}{'cython us':>12}{'speedup':>10}")
    for model in ("simplified", "full"):
        y = s.to_vector(model) if model == "full" else State.hover(s.pos, w, 0.4).to_vector(model)
        for kind in ("deriv", "rk4"):
            t = {}
            out = {}
            for backend in ("python", "cython"):
                deriv, rk4 = kernels.get(model, backend)
                if kind == "deriv":
                    fn = lambda: deriv(y, 0.02, 0.01, pk)
                else:
                    fn = lambda: rk4(y, 0.02, 0.01, 1e-3, pk)
                out[backend] = fn()
                t[backend] = min(timeit.repeat(fn, number=args.repeat, repeat=3)) / args.repeat * 1e6
            diff = float(np.max(np.abs(out["python"] - out["cython"])))
            print(f"{model + ' ' + kind:<22}{t['python']:>12.2f}{t['cython']:>12.2f}{t['python'] / t['cython']:>10.1f}"
                  f"   max|diff| {diff:.1e}")

    cfg = SimConfig(duration=20.0, dt=1e-3)
    policy = HeightController(fixed_reference(Vec3(0, 0, 1)), p, Gains())
    for backend in ("python", "cython"):
        t0 = timeit.default_timer()
        simulate(State.hover(Vec3(0, 0, 1), w), policy, cfg, p, backend=backend)
        dt = timeit.default_timer() - t0
        print(f"20 s hover simulation ({backend}): {dt:.2f} s, {dt / cfg.n_steps * 1e6:.1f} us/step")


if __name__ == "__main__":
    main()
