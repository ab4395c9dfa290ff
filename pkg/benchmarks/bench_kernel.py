"""Compare the compiled and pure-Python pair kernels.

    python3 benchmarks/bench_kernel.py [--instances 2000] [--repeat 3]

Both kernels solve the same instances, drawn like the N-node experiments
draw sender-forwarder pairs; results must agree bit for bit.
"""

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from instances import harness_pair  # noqa: E402

from bexrelay import _pairkernel_py  # noqa: E402

OBJECTIVES = [("alpha=0", 0, 0.0), ("alpha=1", 0, 1.0), ("alpha=2", 0, 2.0),
              ("maxmin", 1, 0.0), ("min-rate", 2, 0.0)]


def args_for(p, obj, alpha):
    return (p.w_s_in, p.w_f_in, p.p, p.rho_s0, p.rho_f0, p.rho_sf, p.r_s_in, p.r_f_in,
            alpha, obj, 1.0)


def best_time(fn, jobs, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for a in jobs:
            fn(*a)
        best = min(best, time.perf_counter() - t0)
    return best / len(jobs) * 1e6


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    try:
        from bexrelay import _pairkernel
    except ImportError:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(a.seed)
    problems = [harness_pair(rng) for _ in range(a.instances)]
    print(f"{'objective':<10} {'cython us':>10} {'python us':>10} {'speedup':>8}")
    for name, obj, alpha in OBJECTIVES:
        jobs = [args_for(p, obj, alpha) for p in problems]
        for j in jobs:
            if _pairkernel.solve_pair(*j) != _pairkernel_py.solve_pair(*j):
                print(f"backends disagree on {name}: {j}")
                return 1
        tc = best_time(_pairkernel.solve_pair, jobs, a.repeat)
        tp = best_time(_pairkernel_py.solve_pair, jobs, a.repeat)
        print(f"{name:<10} {tc:10.2f} {tp:10.2f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
