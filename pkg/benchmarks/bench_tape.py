"""Compare the compiled and pure-Python tape kernels on real curvature workloads.

    python benchmarks/bench_tape.py [--repeat N]
"""

import argparse
import time

import numpy as np

from curvedcheck import registry as reg
from curvedcheck.tape import BACKEND


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args()
    if BACKEND != "cython":
        print("compiled kernel not built; only the Python backend is available")
    cases = [("generic22", reg.generic22()), ("example2", reg.example2()), ("ppwave", reg.ppwave())]
    print(f"{'chart':<10} {'order':>5} {'ops':>7} {'mode':>6} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, chart in cases:
        X = chart.sample_points(args.points, seed=1)
        for order in (2, 3):
            tape = chart.oracle.tape(order)
            for mode in ("single", "batch"):
                if mode == "single":
                    def job(b):
                        return lambda: [tape(x, backend=b) for x in X]
                else:
                    def job(b):
                        return lambda: tape.batch(X, backend=b)
                tp = _time(job("python"), args.repeat)
                tc = _time(job("cython"), args.repeat) if BACKEND == "cython" else float("nan")
                if BACKEND == "cython":
                    assert np.array_equal(tape.batch(X[:5], backend="python"), tape.batch(X[:5], backend="cython"))
                print(f"{name:<10} {order:>5} {len(tape):>7} {mode:>6} {tp * 1e3:>8.1f}ms {tc * 1e3:>8.1f}ms "
                      f"{tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
