"""Compare the compiled and numpy probe-classification kernels.

Usage: python3 benchmarks/bench_kernels.py [--probes N] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cylproc import _kernels_py, kernels
from cylproc.functionals import window_half_extent
from cylproc.geometry import Ball, BallWindow
from cylproc.rng import SeedPath
from cylproc.sampler import ModelSpec, UniformDirections, sample_realization


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--probes", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        print("compiled extension not built; only the numpy backend is available")
    window = BallWindow(1.0)
    print(f"{'r':>4} {'cylinders':>9} {'numpy s':>9} {'compiled s':>10} {'speedup':>8}")
    for r in (2.0, 5.0, 10.0, 20.0):
        spec = ModelSpec(3, 1, 0.3, UniformDirections(), Ball(0.5))
        sp = SeedPath(7, 0)
        pack = sample_realization(spec, window, r, sp)
        y = np.ascontiguousarray(window.sample(sp.stream("probe"), args.probes, 3, r))
        arrs = pack.kernel_arrays()
        he = window_half_extent(window, 3, r)
        t_py, c_py = _best(lambda: _kernels_py.classify(y, *arrs, 0.01, he), args.repeat)
        if kernels.HAVE_COMPILED:
            from cylproc import _kernels
            t_c, c_c = _best(lambda: _kernels.classify(y, *arrs, 0.01, he), args.repeat)
            assert np.array_equal(c_py, c_c), "backends disagree"
            print(f"{r:4g} {len(pack):9d} {t_py:9.4f} {t_c:10.4f} {t_py / t_c:8.1f}")
        else:
            print(f"{r:4g} {len(pack):9d} {t_py:9.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
