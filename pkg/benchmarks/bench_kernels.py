#!/usr/bin/env python3
"""Benchmark the numba and numpy kernel backends against each other.

Times the two hot kernels (edit-distance DP, greedy coverage selection)
under both backends on synthetic workloads and prints a comparison.

Usage:
    python benchmarks/bench_kernels.py [--pairs N] [--length N]
                                       [--matrices N] [--rows N] [--cols N]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from claimedit import _kernels

ALPHABET = "abcdefghijklmnopqrstuvwxyz "


def bench_levenshtein(pairs: int, length: int, rng: random.Random) -> dict[str, float]:
    inputs = []
    for _ in range(pairs):
        a = "".join(rng.choice(ALPHABET) for _ in range(length))
        b = "".join(rng.choice(ALPHABET) for _ in range(length))
        inputs.append((_kernels.codepoints(a), _kernels.codepoints(b)))

    timings = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        _kernels.levenshtein_codes(*inputs[0])  # warm (JIT compile / cache load)
        started = time.perf_counter()
        total = 0
        for a, b in inputs:
            total += _kernels.levenshtein_codes(a, b)
        timings[backend] = time.perf_counter() - started
        print(f"  levenshtein[{backend}]: {timings[backend]:.3f}s  (checksum {total})")
    return timings


def bench_greedy(matrices: int, rows: int, cols: int, budget: int, rng: np.random.Generator) -> dict[str, float]:
    inputs = [rng.random((rows, cols)) for _ in range(matrices)]
    timings = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        _kernels.greedy_select(inputs[0], budget)  # warm
        started = time.perf_counter()
        total = 0.0
        for scores in inputs:
            _, coverage = _kernels.greedy_select(scores, budget)
            total += coverage
        timings[backend] = time.perf_counter() - started
        print(f"  greedy_select[{backend}]: {timings[backend]:.3f}s  (checksum {total:.3f})")
    return timings


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=200, help="string pairs for the edit-distance benchmark")
    parser.add_argument("--length", type=int, default=512, help="characters per string")
    parser.add_argument("--matrices", type=int, default=300, help="matrices for the selection benchmark")
    parser.add_argument("--rows", type=int, default=32, help="queries per matrix")
    parser.add_argument("--cols", type=int, default=512, help="evidence columns per matrix")
    parser.add_argument("--budget", type=int, default=5, help="selection budget")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    original = _kernels.active_backend()
    try:
        print(f"edit distance: {args.pairs} pairs of length {args.length}")
        lev = bench_levenshtein(args.pairs, args.length, random.Random(args.seed))
        print(f"greedy selection: {args.matrices} matrices of {args.rows}x{args.cols}, budget {args.budget}")
        greedy = bench_greedy(args.matrices, args.rows, args.cols, args.budget, np.random.default_rng(args.seed))
        print()
        for name, timings in (("levenshtein", lev), ("greedy_select", greedy)):
            ratio = timings["numpy"] / timings["numba"] if timings["numba"] > 0 else float("inf")
            print(f"{name}: numba is {ratio:.1f}x the numpy fallback")
    finally:
        _kernels.set_backend(original)


if __name__ == "__main__":
    main()
