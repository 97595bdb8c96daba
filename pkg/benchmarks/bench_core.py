"""Benchmark the compiled extension against the pure-Python fallback.

Both implementations are imported directly (bypassing the runtime
selector) so one process can time them side by side:

    python3 benchmarks/bench_core.py
"""

import argparse
import time

import numpy as np

from kpcacam import _core_py

try:
    from kpcacam import _core
except ImportError:
    _core = None


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_jacobi(module, n, repeats):
    rng = np.random.default_rng(0)
    A0 = rng.normal(size=(n, n))
    A0 = 0.5 * (A0 + A0.T)

    def run():
        A = A0.copy()
        V = np.eye(n)
        module.jacobi_rotate_inplace(A, V, 1e-10 * np.linalg.norm(A0), 60)

    return time_call(run, repeats)


def bench_gauss_seidel(module, side, repeats):
    # mask the top-left quadrant of a side x side image
    rng = np.random.default_rng(1)
    plane = rng.random((side, side))
    masked = [r * side + c for r in range(side // 2) for c in range(side // 2)]
    index = {m: i for i, m in enumerate(masked)}
    n = len(masked)
    nbr = np.full((n, 8), -1, dtype=np.int64)
    w = np.zeros((n, 8))
    b = np.zeros(n)
    for i, flat in enumerate(masked):
        r, c = divmod(flat, side)
        entries = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < side and 0 <= cc < side:
                    base = 1 / 6 if (dr == 0 or dc == 0) else 1 / 12
                    entries.append((rr * side + cc, base))
        total = sum(e[1] for e in entries)
        k = 0
        for q, base in entries:
            weight = base / total
            if q in index:
                nbr[i, k] = index[q]
                w[i, k] = weight
                k += 1
            else:
                b[i] += weight * plane.ravel()[q]

    def run():
        x = np.zeros(n)
        module.gauss_seidel_solve(x, b, nbr, w, 1e-8, 10000)

    return time_call(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--jacobi-size", type=int, default=96)
    parser.add_argument("--image-side", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rows = []
    for label, size, fn in (
        ("jacobi_rotate_inplace", f"n={args.jacobi_size}", bench_jacobi),
        ("gauss_seidel_solve", f"{args.image_side}x{args.image_side} image",
         bench_gauss_seidel),
    ):
        n = args.jacobi_size if fn is bench_jacobi else args.image_side
        pure = fn(_core_py, n, args.repeats)
        if _core is not None:
            native = fn(_core, n, args.repeats)
            rows.append((label, size, native, pure, pure / native))
        else:
            rows.append((label, size, None, pure, None))

    print(f"{'kernel':<24} {'problem':<16} {'compiled':>10} {'pure':>10} "
          f"{'speedup':>8}")
    for label, size, native, pure, speedup in rows:
        native_s = f"{native * 1e3:.2f}ms" if native is not None else "n/a"
        speed_s = f"{speedup:.1f}x" if speedup is not None else "n/a"
        print(f"{label:<24} {size:<16} {native_s:>10} {pure * 1e3:>8.2f}ms "
              f"{speed_s:>8}")
    if _core is None:
        print("compiled extension unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
