"""Timing comparison of the two kernel backends.

Runs the hot kernels on synthetic workloads under the numpy backend and,
when numba is importable, under the jit backend, and prints one line per
kernel with the speedup. Jit compilation happens in an untimed warmup
pass.

    python3 benchmarks/bench_kernels.py --points 1200 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from orthofold import actions, groups, kernels


def _workloads(points: int, seed: int):
    rng = np.random.default_rng(seed)
    sphere_pts = rng.normal(size=(points, 6))
    sphere_pts /= np.linalg.norm(sphere_pts, axis=1, keepdims=True)
    dist = kernels.pairwise_euclidean(sphere_pts[: min(points, 600)])
    a = actions.get_action("s2xs2-so3")
    x = actions.sample_points(a.manifold, 1, rng)[0]
    tx = a.tx_tensor(x)
    pool = groups.sample_elements(a.group, 512, rng)
    y = actions.act(a, pool[3], x)
    mode = a.manifold.align_mode
    w = rng.normal(size=(4096, 3))
    return {
        "pairwise_euclidean": lambda: kernels.pairwise_euclidean(sphere_pts),
        "pairwise_sign_aligned": lambda: kernels.pairwise_sign_aligned(sphere_pts),
        "pairwise_phase_aligned": lambda: kernels.pairwise_phase_aligned(sphere_pts),
        "graph_components": lambda: kernels.graph_components(dist, 0.2),
        "rodrigues_batch": lambda: kernels.rodrigues_batch(w),
        "so3_refine": lambda: kernels.so3_refine(tx, y, pool, mode, max_iter=30),
    }


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1200, help="pairwise workload size")
    ap.add_argument("--repeat", type=int, default=5, help="repeats, best time kept")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    if len(backends) == 1:
        print("numba not importable; timing the numpy backend only")

    results: dict = {}
    for backend in backends:
        kernels.set_backend(backend)
        loads = _workloads(args.points, args.seed)
        for name, fn in loads.items():
            fn()  # warmup, compiles on the jit backend
            results.setdefault(name, {})[backend] = _time(fn, args.repeat)

    width = max(len(n) for n in results)
    header = f"{'kernel'.ljust(width)}  {'numpy':>10}"
    if "numba" in backends:
        header += f"  {'numba':>10}  {'speedup':>8}"
    print(header)
    for name, times in results.items():
        line = f"{name.ljust(width)}  {times['numpy'] * 1e3:9.2f}ms"
        if "numba" in times:
            ratio = times["numpy"] / times["numba"] if times["numba"] > 0 else float("inf")
            line += f"  {times['numba'] * 1e3:9.2f}ms  {ratio:7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
