"""Benchmark the JIT kernels against their pure numpy/Python fallbacks.

Times each hot kernel in both builds on synthetic data and prints a
comparison table. The installed package picks one build at import time
(numba when available, the fallback when REIDBENCH_NO_NUMBA=1); this
script reaches past the dispatch and runs both so the difference is
measurable in a single process.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--seed S]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from reidbench import kernels


def best_of(fn, args, repeats: int) -> float:
    """Best wall-clock seconds over `repeats` calls."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        elapsed = time.perf_counter() - start
        if elapsed < best:
            best = elapsed
    return best


def random_codes(rng: np.random.Generator, length: int) -> np.ndarray:
    return rng.integers(97, 123, size=length).astype(np.int32)


def build_workloads(seed: int) -> dict[str, tuple]:
    rng = np.random.default_rng(seed)
    emb = rng.normal(size=(20_000, 64))
    queries = rng.normal(size=(2_000, 64))
    vec = rng.normal(size=64)
    jaro_pairs = [
        (random_codes(rng, int(rng.integers(4, 24))), random_codes(rng, int(rng.integers(4, 24))))
        for _ in range(5_000)
    ]
    lcs_pairs = [
        (
            rng.integers(0, 500, size=int(rng.integers(100, 400))).astype(np.int64),
            rng.integers(0, 500, size=int(rng.integers(100, 400))).astype(np.int64),
        )
        for _ in range(50)
    ]
    return {
        "nearest_vocab (2k x 20k, 64d)": (queries, emb),
        "sq_dist_row (20k, 64d)": (vec, emb),
        "jaro_codes (5k word pairs)": (jaro_pairs,),
        "lcs_len (50 pairs, 100-400 tokens)": (lcs_pairs,),
    }


def batch_jaro(fn):
    def run(pairs):
        total = 0.0
        for a, b in pairs:
            total += fn(a, b)
        return total

    return run


def batch_lcs(fn):
    def run(pairs):
        total = 0
        for a, b in pairs:
            total += fn(a, b)
        return total

    return run


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timed calls per kernel, best is kept")
    parser.add_argument("--seed", type=int, default=20260822, help="workload RNG seed")
    args = parser.parse_args()

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare against the fallback")

    workloads = build_workloads(args.seed)
    rows = [
        ("nearest_vocab (2k x 20k, 64d)", kernels._nearest_vocab_py, kernels._nearest_vocab_nb),
        ("sq_dist_row (20k, 64d)", kernels._sq_dist_row_py, kernels._sq_dist_row_nb),
        ("jaro_codes (5k word pairs)", batch_jaro(kernels._jaro_codes_py), batch_jaro(kernels._jaro_codes_nb)),
        ("lcs_len (50 pairs, 100-400 tokens)", batch_lcs(kernels._lcs_len_py), batch_lcs(kernels._lcs_len_nb)),
    ]

    print(f"{'kernel':<36} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}")
    for name, py_fn, nb_fn in rows:
        work = workloads[name]
        nb_fn(*work)  # warmup triggers JIT compilation outside the timed region
        py_fn(*work)
        t_py = best_of(py_fn, work, args.repeats)
        t_nb = best_of(nb_fn, work, args.repeats)
        print(f"{name:<36} {t_py:>12.4f} {t_nb:>12.4f} {t_py / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
