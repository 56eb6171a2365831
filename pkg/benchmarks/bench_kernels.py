"""Compare the compiled and NumPy field kernels.

Run from the repository root::

    python3 benchmarks/bench_kernels.py --antennas 1000 --points 20000

Each kernel is timed on identical inputs for both backends (median of
``--repeat`` runs) and the outputs are checked against each other.
"""

import argparse
import statistics
import time

import numpy as np

from lerbeam.geometry import ArrayGeometry, antenna_positions
from lerbeam.kernels import get_backend


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--antennas", type=int, default=1000)
    ap.add_argument("--points", type=int, default=20000, help="points per kernel call")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    ant = np.ascontiguousarray(antenna_positions(ArrayGeometry(args.antennas)))
    pts = np.column_stack([rng.uniform(2000, 2500, args.points), rng.uniform(0, 500, args.points)])
    side = int(np.sqrt(args.points))
    xs = np.linspace(2000, 2500, side)
    ys = np.linspace(0, 500, side)
    w = rng.normal(size=args.antennas) + 1j * rng.normal(size=args.antennas)
    w /= np.linalg.norm(w)
    n_sm = min(args.points, 4000)  # steering matrices get large quickly

    cases = {
        "steering_matrix": (lambda k: k.steering_matrix(ant, pts[:n_sm]), args.antennas * n_sm),
        "pattern_power": (lambda k: k.pattern_power(w, ant, pts), args.antennas * args.points),
        "pattern_power_grid": (lambda k: k.pattern_power_grid(w, ant, xs, ys), args.antennas * side * side),
    }
    try:
        backends = {"cython": get_backend("cython"), "python": get_backend("python")}
    except ImportError:
        print("compiled extension not built; only the NumPy backend is available")
        backends = {"python": get_backend("python")}

    print(f"N={args.antennas}  points={args.points}  repeat={args.repeat}")
    print(f"{'kernel':<20}{'backend':<9}{'seconds':>11}{'ns/pair':>10}{'speedup':>9}{'max rel diff':>14}")
    for name, (fn, pairs) in cases.items():
        ref_t, ref = median_time(lambda: fn(backends["python"]), args.repeat)
        for bname, mod in backends.items():
            t, out = (ref_t, ref) if bname == "python" else median_time(lambda: fn(mod), args.repeat)
            diff = float(np.max(np.abs(out - ref)) / np.max(np.abs(ref)))
            print(f"{name:<20}{bname:<9}{t:>11.4f}{1e9 * t / pairs:>10.2f}{ref_t / t:>9.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
