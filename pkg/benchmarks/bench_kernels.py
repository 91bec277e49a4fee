"""Benchmark the compiled kernel lane against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 128,256,512] [--repeat 3]

Both lanes share numerics; this script asserts agreement before timing.
"""

import argparse
import time

import numpy as np

from pdlab import make_rng
from pdlab._kernels import BACKEND, pure

try:
    from pdlab._kernels import _cykernels
except ImportError:
    _cykernels = None


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="128,256,512")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"active backend: {BACKEND}")
    if _cykernels is None:
        print("compiled lane not built; timing the numpy lane only")

    rng = make_rng(0)
    header = f"{'size':>6} {'numpy (ms)':>12}"
    if _cykernels is not None:
        header += f" {'cython (ms)':>12} {'speedup':>8} {'max |diff|':>11}"
    print(header)
    for size in sizes:
        image = rng.random((3, size, size), dtype=np.float32)
        sigma = np.full_like(image, 25 / 255)
        t_pure = time_call(pure.dct_denoise, image, sigma, repeat=args.repeat)
        row = f"{size:>6} {t_pure * 1000:>12.1f}"
        if _cykernels is not None:
            t_cy = time_call(_cykernels.dct_denoise, image, sigma, repeat=args.repeat)
            diff = float(
                np.max(np.abs(pure.dct_denoise(image, sigma) - _cykernels.dct_denoise(image, sigma)))
            )
            assert diff < 1e-5, f"lane mismatch at {size}: {diff}"
            row += f" {t_cy * 1000:>12.1f} {t_pure / t_cy:>7.2f}x {diff:>11.2e}"
        print(row)


if __name__ == "__main__":
    main()
