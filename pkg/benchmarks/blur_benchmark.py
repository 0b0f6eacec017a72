"""Compare the compiled and plain-numpy blur paths on square patches.

Run from the repository root:

    python benchmarks/blur_benchmark.py
    python benchmarks/blur_benchmark.py --sizes 64 256 1024 --repeats 20
"""

import argparse
import statistics
import time

import numpy as np

from ddpdeid.blur import HAS_NUMBA, blur_params, blur_patch


def time_path(patch: np.ndarray, use_numba: bool, repeats: int) -> list[float]:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        blur_patch(patch, use_numba=use_numba)
        times.append(time.perf_counter() - t0)
    return times


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256, 512])
    parser.add_argument("--repeats", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not HAS_NUMBA:
        print("numba is not installed; only the numpy path will run")

    rng = np.random.default_rng(args.seed)
    print(f"{'patch':>10} {'kernel':>7} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for size in args.sizes:
        patch = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
        _, taps = blur_params(size, size)

        numpy_times = time_path(patch, use_numba=False, repeats=args.repeats)
        numpy_best = min(numpy_times)

        if HAS_NUMBA:
            blur_patch(patch, use_numba=True)  # compile outside the timed loop
            numba_times = time_path(patch, use_numba=True, repeats=args.repeats)
            numba_best = min(numba_times)
            diff = np.abs(
                blur_patch(patch, use_numba=True).astype(np.int16)
                - blur_patch(patch, use_numba=False).astype(np.int16)
            ).max()
            if diff:
                raise SystemExit(f"paths disagree by {diff} at size {size}")
            print(
                f"{size:>7}px² {taps:>7} {numpy_best * 1e3:>10.2f}ms"
                f" {numba_best * 1e3:>10.2f}ms {numpy_best / numba_best:>7.1f}x"
            )
        else:
            print(f"{size:>7}px² {taps:>7} {numpy_best * 1e3:>10.2f}ms {'-':>12} {'-':>8}")

    if args.repeats >= 5:
        spread = statistics.stdev(numpy_times) / statistics.mean(numpy_times)
        print(f"numpy timing spread at {args.sizes[-1]}px²: {spread:.1%}")


if __name__ == "__main__":
    main()
