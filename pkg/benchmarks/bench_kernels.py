"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py --samples 1441 --repeat 50

The first numba call per kernel is timed separately (compile or cache load).
"""

import argparse
import math
import time

import numpy as np

from orbitplan import _accel
from orbitplan.orbitcore import GeodeticPoint, geodetic_to_ecf

ISS = dict(a=6796.0, e=0.0004, inc=math.radians(51.64), raan0=0.35, argp0=1.2, m0=0.4,
           n=2 * math.pi / 5574.19, raan_dot=-1.1e-6, argp_dot=8.5e-7)


def _inputs(samples: int):
    t_rel = np.arange(samples) * 30.0
    el = ISS
    args = (el["a"], el["e"], el["inc"], el["raan0"], el["argp0"], el["m0"], el["n"],
            el["raan_dot"], el["argp_dot"], el["n"])
    r, _, _ = _accel.numpy_kernels.kepler_states(t_rel, *args)
    theta = np.linspace(0.0, 2 * math.pi * samples * 30.0 / 86164.1, samples)
    r_ecf = _accel.numpy_kernels.rotate_z(r, theta)
    site = geodetic_to_ecf(GeodeticPoint(45.5, -122.7, 0.1))
    r_sun = np.tile([1.496e8, 0.0, 0.0], (samples, 1))
    return {
        "kepler_states": (t_rel, *args),
        "rotate_z": (r, theta),
        "geodetic": (r_ecf,),
        "look_angles": (np.asarray(site), math.radians(45.5), math.radians(-122.7), r_ecf),
        "eclipse_mask": (r, r_sun, 6378.137),
    }


def _best(fn, args, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1441)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()

    backends = [_accel.numpy_kernels]
    if _accel.numba_kernels is not None:
        backends.append(_accel.numba_kernels)
    inputs = _inputs(args.samples)

    first = {}
    if _accel.numba_kernels is not None:
        for name, a in inputs.items():
            t0 = time.perf_counter()
            getattr(_accel.numba_kernels, name)(*a)
            first[name] = time.perf_counter() - t0

    print(f"samples={args.samples} repeat={args.repeat} active={_accel.kernels.name}")
    print(f"{'kernel':<14}{'numpy us':>12}{'numba us':>12}{'speedup':>10}{'numba 1st ms':>15}")
    for name, a in inputs.items():
        row = [_best(getattr(b, name), a, args.repeat) * 1e6 for b in backends]
        if len(row) == 1:
            print(f"{name:<14}{row[0]:>12.1f}{'-':>12}{'-':>10}{'-':>15}")
        else:
            print(f"{name:<14}{row[0]:>12.1f}{row[1]:>12.1f}{row[0] / row[1]:>9.1f}x{first[name] * 1e3:>15.1f}")


if __name__ == "__main__":
    main()
