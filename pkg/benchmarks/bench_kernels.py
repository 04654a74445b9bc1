"""Time the numba kernels against the pure-numpy reference.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Compilation is
triggered once before timing; both backends are checked to agree.
"""

import argparse
import time

import numpy as np

from nctvem import kernels
from nctvem.planewave import make_directions


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    seeds = rng.uniform(0.0, 1.0, (512, 2))
    rect = np.array([0.0, 1.0, 0.0, 1.0])
    theta = np.sort(rng.uniform(0, 2 * np.pi, 9))
    poly = np.column_stack([np.cos(theta), np.sin(theta)]) * 0.1
    d = make_directions(7).directions
    vecs = np.ascontiguousarray((d[None, :, :] - d[:, None, :]).reshape(-1, 2))
    x = np.geomspace(0.01, 200.0, 20000)
    return {
        "voronoi_cells (512 seeds)": (lambda m: m.voronoi_cells(seeds, rect)),
        "polygon_osc_integrals (225 freq)": (lambda m: m.polygon_osc_integrals(poly, vecs, 16.0)),
        "bessel_j0y0j1y1 (20k points)": (lambda m: m.bessel_j0y0j1y1(x)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.numba_impl is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, call in cases(rng).items():
        ref = call(kernels.numpy_impl)
        fast = call(kernels.numba_impl)  # compiles
        for a, b in zip(np.atleast_1d(ref) if not isinstance(ref, tuple) else ref,
                        fast if isinstance(fast, tuple) else np.atleast_1d(fast)):
            assert np.allclose(a, b, rtol=1e-10, atol=1e-12), name
        t_np = _time(lambda: call(kernels.numpy_impl), args.repeat)
        t_nb = _time(lambda: call(kernels.numba_impl), args.repeat)
        print(f"{name:36s} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} {t_np / t_nb:8.1f}")


if __name__ == "__main__":
    main()
