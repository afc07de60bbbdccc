"""Compare the compiled and pure-Python kernel backends on FreeSolv pairs.

Usage: python benchmarks/bench_kernel.py [--pairs N] [--solver auto|dense|fixed-point]
"""

import argparse
import time

import numpy as np

from solvkernel.dataset import bundled_freesolv_path
from solvkernel.io import load_csv
from solvkernel.kernel import KernelHyperparameters, available_backends, set_backend
from solvkernel.kernel.mgk import _evaluate
from solvkernel.kernel.prepare import prepare


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=300)
    ap.add_argument("--solver", default="auto")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    graphs = load_csv(bundled_freesolv_path()).graphs()
    hyper = KernelHyperparameters(solver=args.solver)
    prepared = [prepare(g, hyper) for g in graphs]
    rng = np.random.default_rng(args.seed)
    gi, gj = rng.integers(0, len(graphs), size=(2, args.pairs))

    results = {}
    for backend in available_backends():
        set_backend(backend)
        t0 = time.perf_counter()
        results[backend] = _evaluate(prepared, gi, gj, hyper, threads=1)
        dt = time.perf_counter() - t0
        print(f"{backend:>9}: {dt:8.3f} s  {1e6 * dt / args.pairs:9.1f} us/pair")
    if len(results) == 2:
        a, b = results["compiled"], results["python"]
        print(f"max relative difference: {np.max(np.abs(a - b) / np.abs(a)):.2e}")


if __name__ == "__main__":
    main()
