"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Each kernel is run once to warm the JIT cache, then timed ``--repeat`` times;
the best time is reported.  ``--end-to-end`` also times a representation
check in two subprocesses, one per ``SELFSIM_KERNELS`` setting.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from selfsim import builtin
from selfsim.kernels import _numba, _numpy


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def cases(rng):
    s = builtin("sierpinski")
    seed = s.to_float([s.seed])[0]
    grid = _numpy.word_images(s.float_mats, s.float_offsets, seed, 8)
    F, G = _cplx(rng, 1024, 27, 2), _cplx(rng, 1024, 27, 2)
    sub = _cplx(rng, 3, 1024, 9, 9)
    m9, d27 = _cplx(rng, 4096, 9, 9), _cplx(rng, 1024, 27, 27)
    return {
        "word_images (3^10 points)": lambda k: k.word_images(s.float_mats, s.float_offsets, seed, 10),
        "min_sq_dist (6561 x 500)": lambda k: k.min_sq_dist(grid, grid[:500] + 1e-3),
        "spectral_norms (4096 x 9x9)": lambda k: k.spectral_norms(m9),
        "block_matmul (27 dense columns)": lambda k: k.block_matmul(sub.transpose(1, 0, 2, 3), d27),
        "block_matmul (2 factor columns)": lambda k: k.block_matmul(sub.transpose(1, 0, 2, 3), F),
        "lowrank_dense (1024 x 27, rank 2)": lambda k: k.lowrank_dense(F, G),
        "blockdiag_lowrank (1024 x 27)": lambda k: k.blockdiag_lowrank(sub, F, G),
    }


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def end_to_end():
    code = ("import time; from selfsim import builtin, kernels; "
            "from selfsim.verify import representation_checks; "
            "representation_checks(builtin('tent'), count=4, max_level=1, grid_depth=4); "
            "t = time.perf_counter(); "
            "representation_checks(builtin('sierpinski'), count=8, max_level=3, grid_depth=8); "
            "print(kernels.BACKEND, time.perf_counter() - t)")
    for backend in ("numba", "numpy"):
        env = dict(os.environ, SELFSIM_KERNELS=backend)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"{'representation_checks (sierpinski, depth 8)':<44} {name:>6} {float(secs):9.3f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':<36} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, fn in cases(rng).items():
        a = best_of(lambda: fn(_numpy), args.repeat)
        b = best_of(lambda: fn(_numba), args.repeat)
        print(f"{name:<36} {a * 1e3:8.2f}ms {b * 1e3:8.2f}ms {a / b:7.1f}x")
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
