"""Benchmark the hot kernels: numba fast path vs pure-numpy fallback.

Run both lanes in one process by reloading horolab.kernels with the
HOROLAB_NO_NUMBA environment flag toggled:

    python benchmarks/bench_kernels.py [--levels 9] [--grid 20000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import importlib
import os
import sys
import time

import numpy as np


def build_inputs(levels):
    from horolab import fuchsian

    disks = fuchsian.parse_group_config(
        "kind = schottky\npair = -1.5 0.5 1.5 0.5\npair = -4.5 0.5 4.5 0.5\n"
    )[0]
    group = fuchsian.build_group(disks)
    gens, inv_of = group._gen_arrays()
    rng = np.random.default_rng(0)
    return group, gens, inv_of, rng


def bench_lane(no_numba, levels, grid_n, repeat):
    os.environ["HOROLAB_NO_NUMBA"] = "1" if no_numba else "0"
    import horolab.kernels as kernels

    kernels = importlib.reload(kernels)
    lane = "numpy" if not kernels.USE_NUMBA else "numba"
    group, gens, inv_of, rng = build_inputs(levels)

    results = {}

    def _once(fn):
        t0 = time.perf_counter()
        fn()
        return time.perf_counter() - t0

    def timeit(name, fn):
        fn()  # warm-up (JIT compilation on the numba lane)
        results[name] = min(_once(fn) for _ in range(repeat))

    def run_extend():
        mats = np.eye(2)[None, :, :].copy()
        last = np.array([-1], dtype=np.int64)
        for _ in range(levels):
            mats, last = kernels.extend_words(mats, last, gens, inv_of)
        return mats

    mats_final = run_extend()
    timeit("extend_words(levels=%d)" % levels, run_extend)
    timeit("displacements(%d)" % mats_final.shape[0], lambda: kernels.displacements(mats_final))

    u = rng.uniform(-5, 5, 4000)
    w = rng.uniform(0, 1, 4000)
    xs = rng.uniform(-5, 5, grid_n)
    ys = rng.uniform(0.1, 2.0, grid_n)
    timeit(
        "eigenfunction_grid(%d pts, %d atoms)" % (grid_n, u.size),
        lambda: kernels.eigenfunction_grid(u, w, xs, ys, 0.7, 3),
    )
    return lane, results, mats_final.shape[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=9)
    ap.add_argument("--grid", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    lanes = {}
    for no_numba in (False, True):
        lane, res, n_words = bench_lane(no_numba, args.levels, args.grid, args.repeat)
        lanes[lane] = res
    if "numba" not in lanes:
        print("numba not available; only the numpy lane was timed")

    names = list(next(iter(lanes.values())).keys())
    width = max(len(n) for n in names) + 2
    header = "kernel".ljust(width) + "".join(l.rjust(12) for l in lanes)
    if len(lanes) == 2:
        header += "speedup".rjust(10)
    print(header)
    for name in names:
        line = name.ljust(width)
        for lane in lanes:
            line += ("%.4fs" % lanes[lane][name]).rjust(12)
        if len(lanes) == 2:
            ratio = lanes["numpy"][name] / lanes["numba"][name]
            line += ("%.1fx" % ratio).rjust(10)
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
