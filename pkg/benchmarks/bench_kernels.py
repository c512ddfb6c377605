"""Compare the compiled simulation kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--steps N] [--sizes a,b,c]
"""

import argparse
import os
import time

import numpy as np

import hypersync.dynamics as dyn_mod
from hypersync.dynamics import make_dynamics, simulate_continuous, simulate_discrete
from hypersync.hypergraph import validate


def ring_hypergraph(n, edge_size=3):
    verts = [str(i) for i in range(n)]
    edges = []
    for i in range(n):
        members = [str((i + j) % n) for j in range(edge_size)]
        edges.append((f"e{i}", members))
    return validate(verts, edges)


def time_run(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--sizes", default="50,200,800")
    args = ap.parse_args()

    if not dyn_mod.HAVE_COMPILED:
        print("compiled kernels unavailable; benchmarking the fallback only")

    dyn = make_dynamics("logistic")
    tanh = make_dynamics("tanh")
    print(f"{'n':>6} {'engine':>8} {'discrete':>12} {'rk4':>12} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        H = ring_hypergraph(n)
        rng = np.random.default_rng(0)
        x0 = rng.uniform(0, 1, n)
        rows = {}
        engines = ["compiled", "python"] if dyn_mod.HAVE_COMPILED else ["python"]
        for engine in engines:
            if engine == "python":
                os.environ["HYPERSYNC_ENGINE"] = "python"
            try:
                td = time_run(lambda: simulate_discrete(
                    H, dyn, 0.05, x0, args.steps, stride=args.steps))
                tc = time_run(lambda: simulate_continuous(
                    H, tanh, 0.05, x0, 1.0, dt=1e-2, stride=100))
            finally:
                os.environ.pop("HYPERSYNC_ENGINE", None)
            rows[engine] = (td, tc)
            print(f"{n:>6} {engine:>8} {td*1e3:>10.2f}ms {tc*1e3:>10.2f}ms", end="")
            if engine == "python" and "compiled" in rows:
                print(f" {rows['python'][0] / rows['compiled'][0]:>7.1f}x")
            else:
                print()


if __name__ == "__main__":
    main()
