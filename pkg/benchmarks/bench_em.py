#!/usr/bin/env python3
"""Benchmark the EM kernels: numba-compiled loops vs the numpy fallback.

Times one full EM sufficient-statistics pass and one mixture-weight fit on
synthetic data at a few sizes, then prints a speedup table. Run from the
repository root:

    python3 benchmarks/bench_em.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from problex import _kernels


def synthetic_pairs(rng, n_classes, n_verbs, n_nouns, n_pairs):
    return (
        rng.integers(0, n_verbs, size=n_pairs).astype(np.int64),
        rng.integers(0, n_nouns, size=n_pairs).astype(np.int64),
        rng.integers(1, 50, size=n_pairs).astype(np.float64),
        rng.dirichlet(np.ones(n_classes)),
        rng.dirichlet(np.ones(n_verbs), size=n_classes),
        rng.dirichlet(np.ones(n_nouns), size=n_classes),
    )


def time_call(fn, args, repeats):
    fn(*args)  # warm up (JIT compile / cache touch)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    impls = {"numpy": _kernels.numpy_impls()}
    try:
        impls["numba"] = _kernels.numba_impls()
    except ImportError:
        print("numba unavailable; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<24} {'size':<26} " + " ".join(f"{name:>10}" for name in impls) + "  speedup")
    for n_classes, n_verbs, n_nouns, n_pairs in (
        (8, 200, 500, 20_000),
        (35, 500, 2000, 100_000),
        (35, 1000, 5000, 300_000),
    ):
        inputs = synthetic_pairs(rng, n_classes, n_verbs, n_nouns, n_pairs)
        times = {name: time_call(impl["em_pair_stats"], inputs, args.repeats) for name, impl in impls.items()}
        label = f"K={n_classes} pairs={n_pairs}"
        row = " ".join(f"{times[name] * 1e3:>8.2f}ms" for name in impls)
        speedup = times["numpy"] / times.get("numba", times["numpy"])
        print(f"{'em_pair_stats':<24} {label:<26} {row}  {speedup:>6.2f}x")

    for n_classes, n_nouns in ((8, 50), (35, 200), (35, 1000)):
        noun_probs = np.ascontiguousarray(rng.dirichlet(np.ones(n_nouns), size=n_classes).T)
        freqs = rng.integers(1, 50, size=n_nouns).astype(np.float64)
        init = np.full(n_classes, 1.0 / n_classes)
        inputs = (noun_probs, freqs, init, 1e-9, 500)
        times = {
            name: time_call(impl["mixture_weight_em"], inputs, args.repeats)
            for name, impl in impls.items()
        }
        label = f"K={n_classes} nouns={n_nouns}"
        row = " ".join(f"{times[name] * 1e3:>8.2f}ms" for name in impls)
        speedup = times["numpy"] / times.get("numba", times["numpy"])
        print(f"{'mixture_weight_em':<24} {label:<26} {row}  {speedup:>6.2f}x")


if __name__ == "__main__":
    main()
