#!/usr/bin/env python3
"""Compare the compiled bit-kernel backend against the numpy fallback.

Times the hot kernels on decoder-shaped workloads and prints a small
table.  Run after an editable install:

    python3 bench/bench_kernels.py
    python3 bench/bench_kernels.py --repeat 9 --coset-bits 22

The two backends are imported directly (ignoring RMLAB_BACKEND) so one
process can time both; if the extension is missing only numpy rows are
printed.
"""
import argparse
import time

import numpy as np

from rmlab._kernels import _pybits

try:
    from rmlab._kernels import _bitsc
except ImportError:
    _bitsc = None

# slacks mirror the decoder's coset scan settings
REL, ABS, KEEP = 1e-7, 1e-9, 1 << 16


def _best_of(repeat, fn, *args):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rand_packed(rng, rows, nbytes):
    return rng.integers(0, 256, (rows, nbytes), dtype=np.uint8)


def _score_table(rng, nbytes):
    costs = rng.uniform(0.05, 4.0, nbytes * 8)
    padded = costs.reshape(nbytes, 8)
    values = ((np.arange(256)[:, None] >> (7 - np.arange(8)[None, :])) & 1).astype(float)
    return np.ascontiguousarray(values @ padded.T).T.copy()


def build_workloads(rng, coset_bits, n):
    nbytes = (n + 7) // 8
    basis = _rand_packed(rng, coset_bits, nbytes)
    offset = _rand_packed(rng, 1, nbytes)[0]
    table = _score_table(rng, nbytes)
    stream = _rand_packed(rng, 1 << 20, nbytes)
    supports = rng.integers(0, 16, (200_000, 6), dtype=np.int64)
    g_rows = _rand_packed(rng, 16, 3)
    return [
        ("coset_scan", f"2^{coset_bits} coset, n={n}",
         lambda k: k.coset_scan(basis, offset, table, REL, ABS, KEEP)),
        ("weight_histogram", f"2^{coset_bits} words, n={n}",
         lambda k: k.weight_histogram(basis, n, offset)),
        ("popcount_rows", f"2^20 x {nbytes}B",
         lambda k: k.popcount_rows(stream)),
        ("score_rows", f"2^20 x {nbytes}B",
         lambda k: k.score_rows(stream, table)),
        ("syndrome_zero_count", "2e5 supports x 6",
         lambda k: k.syndrome_zero_count(g_rows, supports)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repetitions")
    ap.add_argument("--coset-bits", type=int, default=20, help="log2 coset size")
    ap.add_argument("--n", type=int, default=64, help="word length in bits")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    jobs = build_workloads(rng, args.coset_bits, args.n)

    backends = [("numpy", _pybits)]
    if _bitsc is not None:
        backends.append(("cython", _bitsc))
    else:
        print("note: compiled extension not importable; timing numpy only")

    width = max(len(name) for name, _, _ in jobs)
    header = f"{'kernel':<{width}}  {'workload':<22}" + "".join(
        f"{name:>12}" for name, _ in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for name, workload, call in jobs:
        times = []
        results = []
        for _, impl in backends:
            dt, out = _best_of(args.repeat, call, impl)
            times.append(dt)
            results.append(out)
        if len(results) == 2:
            a, b = results
            same = all(
                np.array_equal(x, y) if isinstance(x, np.ndarray) else x == y
                for x, y in (zip(a, b) if isinstance(a, tuple) else [(a, b)])
            )
            if not same:
                raise SystemExit(f"backend mismatch in {name}")
        row = f"{name:<{width}}  {workload:<22}" + "".join(
            f"{dt * 1e3:>10.2f}ms" for dt in times
        )
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
