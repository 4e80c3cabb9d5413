"""Compare the compiled and plain-Python per-core simulation kernels.

Usage: python benchmarks/bench_engine.py [--horizon T] [--repeat K]
"""

import argparse
import time

from mcsched import Partition, SimConfig, TaskSet, TaskSpec, run, validate_task_set
from mcsched import _kernels as K


def workload(horizon: int) -> SimConfig:
    specs = []
    periods = (5, 8, 10, 16, 20, 25, 40, 50)
    for core in range(4):
        for k, t in enumerate(periods):
            specs.append(TaskSpec(f"c{core}t{k}", "periodic", max(1, t // 10), t, None, k % 3))
        specs.append(TaskSpec(f"c{core}s", "sporadic", 2, 30, 15))
    ts = validate_task_set(TaskSet(tuple(specs)))
    part = Partition(4, {t.id: int(t.id[1]) for t in ts})
    return SimConfig(ts, part, {0: "rm", 1: "rm", 2: "edf", 3: "edf"}, horizon, seed=1)


def best_of(cfg, kernel, repeat):
    """Best end-to-end and kernel-only wall time over ``repeat`` runs."""
    spent = [0.0]

    def timed(*args):
        start = time.perf_counter()
        out = kernel(*args)
        spent[0] += time.perf_counter() - start
        return out

    totals, kernels = [], []
    for _ in range(repeat):
        spent[0] = 0.0
        start = time.perf_counter()
        trace, _ = run(cfg, kernel=timed)
        totals.append(time.perf_counter() - start)
        kernels.append(spent[0])
    return min(totals), min(kernels), trace


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cfg = workload(args.horizon)

    slow, slow_k, slow_trace = best_of(cfg, K.simulate_core_python, args.repeat)
    print(f"python: total {slow:8.3f} s, kernel {slow_k:8.3f} s ({len(slow_trace.events)} events)")
    if K.simulate_core_numba is None:
        print("numba not installed; compiled kernel skipped")
        return
    start = time.perf_counter()
    run(workload(10), kernel=K.simulate_core_numba)
    print(f"numba warm-up {time.perf_counter() - start:.3f} s")
    fast, fast_k, fast_trace = best_of(cfg, K.simulate_core_numba, args.repeat)
    print(f"numba:  total {fast:8.3f} s, kernel {fast_k:8.3f} s")
    print(f"identical trace: {fast_trace.events == slow_trace.events}")
    print(f"speedup: kernel {slow_k / fast_k:.1f}x, end to end {slow / fast:.1f}x")

if __name__ == "__main__":
    main()
