#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py

Measures the two hot loops on representative workloads: binomial tail sums
at corpus-scale n, and phrase scanning over chunk-sized word sequences with
a lexicon-sized phrase table.
"""

from __future__ import annotations

import random
import time
from array import array

from biasaudit.kernels import _pure

try:
    from biasaudit.kernels import _native
except ImportError:
    _native = None


def bench(fn, *args, repeats: int = 5, inner: int = 1) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / inner)
    return best


def binom_workloads():
    yield "binom_tail n=3928 (published table row)", (3928, 3132, 3928, 0.7623), 200
    yield "binom_tail n=10^5 tail at mode", (100_000, 50_000, 100_000, 0.5), 20
    yield "binom_tail n=10^6 tail at mode", (1_000_000, 500_000, 1_000_000, 0.5), 5


def scan_workload(n_words: int, n_phrases: int, vocab: int = 2000, seed: int = 0):
    rng = random.Random(seed)
    text = array("i")
    for i in range(2 * n_words - 1):
        text.append(rng.randrange(vocab) if i % 2 == 0 else 0)
    flat, offsets = array("i"), array("i", [0])
    phrases = []
    for _ in range(n_phrases):
        length = rng.choice([1, 1, 1, 2, 3])
        ids = []
        for j in range(2 * length - 1):
            ids.append(rng.randrange(vocab) if j % 2 == 0 else 0)
        phrases.append(ids)
        flat.extend(ids)
        offsets.append(len(flat))
    buckets = [[] for _ in range(vocab + 2)]
    for idx, ids in enumerate(phrases):
        buckets[ids[0]].append(idx)
    cand_off, cand_list = array("i", [0]), array("i")
    for bucket in buckets:
        cand_list.extend(bucket)
        cand_off.append(len(cand_list))
    return text, n_words, flat, offsets, cand_off, cand_list


def main() -> None:
    backends = [("pure", _pure)] + ([("native", _native)] if _native else [])
    if _native is None:
        print("compiled kernels not available; benchmarking the fallback only\n")

    rows = []
    for name, args, inner in binom_workloads():
        timings = {b: bench(mod.binom_tail, *args, inner=inner) for b, mod in backends}
        rows.append((name, timings))

    scan_args = scan_workload(n_words=300, n_phrases=400)
    timings = {b: bench(mod.scan_phrases, *scan_args, inner=50) for b, mod in backends}
    rows.append(("scan_phrases 300-word chunk, 400 phrases", timings))

    scan_args = scan_workload(n_words=5000, n_phrases=400, seed=1)
    timings = {b: bench(mod.scan_phrases, *scan_args, inner=10) for b, mod in backends}
    rows.append(("scan_phrases 5000-word document, 400 phrases", timings))

    width = max(len(r[0]) for r in rows)
    header = f"{'workload'.ljust(width)}  {'pure':>12}  {'native':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        pure_t = timings["pure"]
        native_t = timings.get("native")
        native_col = f"{native_t * 1e6:10.1f}us" if native_t else " " * 12
        speedup = f"{pure_t / native_t:7.1f}x" if native_t else " " * 8
        print(f"{name.ljust(width)}  {pure_t * 1e6:10.1f}us  {native_col}  {speedup}")


if __name__ == "__main__":
    main()
