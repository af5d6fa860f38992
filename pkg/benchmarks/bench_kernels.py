"""Benchmark the geometry inner loops: compiled extension vs numpy fallback.

Runs ``points_in_ring`` and ``count_cleared`` on star-shaped test polygons
across a range of point counts and prints a timing table with speedups.

    python3 benchmarks/bench_kernels.py [--points 1000000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from solarzoning import _kernels


def star_ring(n_vertices: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=n_vertices))
    radii = rng.uniform(150.0, 450.0, size=n_vertices)
    vx = np.ascontiguousarray(radii * np.cos(angles))
    vy = np.ascontiguousarray(radii * np.sin(angles))
    return vx, vy


def best_of(repeats: int, fn, *args) -> float:
    best = math.inf
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=1_000_000,
                        help="points per call (default: 1,000,000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many timings (default: 5)")
    args = parser.parse_args()

    implementations = [("python", _kernels.pyfallback)]
    if _kernels.IMPLEMENTATION == "cython":
        implementations.append(("cython", _kernels.active))
    else:
        print("note: compiled extension unavailable; timing the fallback only")

    rng = np.random.default_rng(7)
    px = np.ascontiguousarray(rng.uniform(-450.0, 450.0, args.points))
    py = np.ascontiguousarray(rng.uniform(-450.0, 450.0, args.points))

    rows = []
    for n_vertices in (4, 8, 16, 32):
        vx, vy = star_ring(n_vertices, seed=n_vertices)
        setbacks = np.ascontiguousarray(
            rng.uniform(0.0, 30.0, n_vertices), dtype=np.float64
        )
        timings: dict[str, dict[str, float]] = {}
        results: dict[str, tuple] = {}
        for label, impl in implementations:
            t_ring = best_of(args.repeats, impl.points_in_ring, px, py, vx, vy)
            t_clear = best_of(
                args.repeats, impl.count_cleared, px, py, vx, vy, setbacks
            )
            timings[label] = {"points_in_ring": t_ring, "count_cleared": t_clear}
            results[label] = (
                int(impl.points_in_ring(px, py, vx, vy).sum()),
                int(impl.count_cleared(px, py, vx, vy, setbacks)),
            )
        if len(results) == 2 and results["python"] != results["cython"]:
            raise SystemExit(
                f"implementations disagree on {n_vertices}-gon: {results}"
            )
        rows.append((n_vertices, timings))

    mpts = args.points / 1e6
    header = f"{'kernel':<16} {'vertices':>8}"
    for label, _ in implementations:
        header += f" {label + ' (ms)':>14}"
    if len(implementations) == 2:
        header += f" {'speedup':>9}"
    print(f"\n{args.points:,} points per call, best of {args.repeats}")
    print(header)
    print("-" * len(header))
    for kernel in ("points_in_ring", "count_cleared"):
        for n_vertices, timings in rows:
            line = f"{kernel:<16} {n_vertices:>8}"
            for label, _ in implementations:
                line += f" {timings[label][kernel] * 1e3:>14.2f}"
            if len(implementations) == 2:
                ratio = timings["python"][kernel] / timings["cython"][kernel]
                line += f" {ratio:>8.1f}x"
            print(line)
    for label, _ in implementations:
        slowest = max(t[label]["count_cleared"] for _, t in rows)
        print(f"{label}: worst-case count_cleared throughput "
              f"{mpts / slowest:.1f} Mpts/s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
