"""Timing comparison of the compiled and pure-NumPy trial kernels.

Runs the same seeded trial batch through both backends, checks that they
agree trial for trial, and reports per-trial cost. Usage:

    python3 benchmarks/bench_backends.py [--trials N]
"""

import argparse
import math
import time

import numpy as np

from cachecancel.config import reference_network
from cachecancel.montecarlo import (TrialConfig, available_backends,
                                    estimate_plr, sample_trials)


def bench(backend, config, repeats=3):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        estimate = estimate_plr(config, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, estimate


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    params = reference_network(r_b=120.0)
    config = TrialConfig(params=params, eta_i=0.15, trials=args.trials,
                         seed=args.seed)
    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{args.trials} trials, eta_i=0.15, r_b=120 m")

    results = {}
    for backend in backends:
        elapsed, estimate = bench(backend, config)
        results[backend] = estimate
        rate = elapsed / args.trials * 1e6
        print(f"  {backend:>8}: {elapsed:8.3f} s  ({rate:7.2f} us/trial)  "
              f"loss rate {estimate.mean:.5f} +- {estimate.std_error:.5f}")

    if len(backends) == 2:
        a, b = (results[name] for name in backends)
        if a.mean != b.mean or a.trials != b.trials:
            raise SystemExit("backends disagree on the folded estimate")
        lost_a = sample_trials(config, backend=backends[0])[0]
        lost_b = sample_trials(config, backend=backends[1])[0]
        mism = int(np.count_nonzero(lost_a != lost_b))
        print(f"per-trial loss agreement: {args.trials - mism}/{args.trials}"
              f" identical ({mism} mismatches)")
        if mism:
            raise SystemExit("per-trial outcomes diverged between backends")


if __name__ == "__main__":
    main()
