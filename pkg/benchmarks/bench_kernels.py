"""Timing comparison between the compiled core and the numpy fallback.

Runs the periodic difference kernels and the l1-ball threshold search on
a few problem sizes and prints a table of per-call times plus an
end-to-end solver iteration timing.  Usage:

    python benchmarks/bench_kernels.py [--repeats 20]
"""

import argparse
import time

import numpy as np

from hsdenoise import _kernels
from hsdenoise.degrade import NoiseSpec, calibrate_radii, simulate
from hsdenoise.phantom import piecewise_cube
from hsdenoise.regularizer import BlockGeometry
from hsdenoise.solver import DenoiseProblem, StoppingRule, solve

SHAPES = [(32, 32, 16), (64, 64, 32), (100, 100, 60)]


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_diffs(repeats):
    print("periodic differences, per call (best of %d)" % repeats)
    print(f"{'shape':>14} {'axis':>4} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for shape in SHAPES:
        x = rng.normal(size=shape)
        for axis in range(3):
            t_np = best_of(lambda: _kernels.forward_diff_numpy(x, axis), repeats)
            if _kernels.HAVE_COMPILED_CORE:
                t_c = best_of(lambda: _kernels._core.forward_diff(x, axis), repeats)
                ratio = f"{t_np / t_c:7.2f}x"
            else:
                t_c, ratio = float("nan"), "     n/a"
            print(
                f"{str(shape):>14} {axis:>4} {t_np * 1e3:9.3f}ms {t_c * 1e3:9.3f}ms {ratio}"
            )


def bench_threshold(repeats):
    print()
    print("l1-ball threshold search, per call (best of %d)" % repeats)
    print(f"{'n':>14} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    rng = np.random.default_rng(1)
    for n in (10_000, 100_000, 1_000_000):
        mag = np.abs(rng.normal(size=n))
        radius = 0.1 * mag.sum()
        t_np = best_of(lambda: _kernels.l1_threshold_numpy(mag.copy(), radius), repeats)
        if _kernels.HAVE_COMPILED_CORE:
            t_c = best_of(lambda: _kernels._core.l1_threshold(mag.copy(), radius), repeats)
            ratio = f"{t_np / t_c:7.2f}x"
        else:
            t_c, ratio = float("nan"), "     n/a"
        print(f"{n:>14} {t_np * 1e3:9.3f}ms {t_c * 1e3:9.3f}ms {ratio}")


def bench_solver():
    print()
    clean = piecewise_cube(32, 32, 16, seed=7)
    spec = NoiseSpec.from_case(5, seed=5)
    sim = simulate(clean, spec)
    radii = calibrate_radii(spec, clean.size)
    problem = DenoiseProblem(sim.observed, *radii, BlockGeometry(32, 32, 8, 8))
    stopping = StoppingRule(relative_change=1e-9, max_iterations=200)
    t0 = time.perf_counter()
    result = solve(problem, stopping)
    dt = time.perf_counter() - t0
    label = "compiled core" if _kernels.HAVE_COMPILED_CORE else "numpy fallback"
    print(
        f"solver, 32x32x16 case 5 ({label}): "
        f"{result.report.iterations} iterations in {dt:.2f}s "
        f"({dt / result.report.iterations * 1e3:.2f}ms per iteration)"
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    if not _kernels.HAVE_COMPILED_CORE:
        print("note: compiled core not available, numpy columns only")
    bench_diffs(args.repeats)
    bench_threshold(args.repeats)
    bench_solver()


if __name__ == "__main__":
    main()
