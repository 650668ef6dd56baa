#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-NumPy fallback.

Times the replicate-refit batch (the bootstrap hot loop) and a full
end-to-end bootstrap on a synthetic dataset, for every available backend.

    python benchmarks/bench_backends.py [--rows 1000] [--ivs 8] [--replicates 2000]
"""

import argparse
import time

import numpy as np

from pctcoef import BootstrapConfig, available_backends, bootstrap_fits, get_backend
from pctcoef.dataset import Column, Dataset, VariableSpec
from pctcoef.percentize import build_design_matrix


def make_dm(rows, ivs, seed=0):
    rng = np.random.default_rng(seed)
    slopes = rng.uniform(-0.3, 0.3, ivs)
    x = rng.uniform(0, 10, size=(rows, ivs))
    y = 2.0 + (x - 5.0) @ slopes / ivs + rng.normal(0, 0.5, rows)
    columns = [Column(VariableSpec("y", "dependent", "numeric", -5, 9), y)]
    for j in range(ivs):
        columns.append(
            Column(VariableSpec(f"x{j}", "independent", "numeric", 0, 10), x[:, j])
        )
    return build_design_matrix(Dataset(columns))


def bench_batch(kernel, dm, replicates, seed=0):
    rng = np.random.default_rng(seed)
    n = dm.n_rows
    p = len(dm.ivs)
    indices = rng.integers(0, n, size=(replicates, n), dtype=np.int64)
    bw = np.empty((replicates, p + 1))
    bp = np.empty((replicates, p + 1))
    beta = np.empty((replicates, p))
    r2 = np.empty(replicates)
    ok = np.zeros(replicates, dtype=np.uint8)
    start = time.perf_counter()
    kernel.fit_replicate_batch(
        dm.y_raw, dm.X_raw, dm.y_pct, dm.X_pct, indices, bw, bp, beta, r2, ok
    )
    elapsed = time.perf_counter() - start
    assert ok.all()
    return elapsed


def bench_end_to_end(kernel, dm, replicates):
    cfg = BootstrapConfig(n_bootstrap=replicates, seed=42)
    start = time.perf_counter()
    bootstrap_fits(dm, cfg, threads=1, _kernel=kernel)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--ivs", type=int, default=8)
    parser.add_argument("--replicates", type=int, default=2000)
    args = parser.parse_args()

    dm = make_dm(args.rows, args.ivs)
    names = available_backends()
    print(f"{args.rows} rows, {args.ivs} IVs, {args.replicates} replicates")
    print(f"{'backend':<10} {'batch (s)':>10} {'per rep (us)':>13} {'end-to-end (s)':>15}")
    times = {}
    for name in names:
        kernel = get_backend(name)
        bench_batch(kernel, dm, min(64, args.replicates))  # warm up
        t_batch = bench_batch(kernel, dm, args.replicates)
        t_full = bench_end_to_end(kernel, dm, args.replicates)
        times[name] = t_batch
        print(
            f"{name:<10} {t_batch:>10.3f} "
            f"{1e6 * t_batch / args.replicates:>13.1f} {t_full:>15.3f}"
        )
    if len(times) == 2:
        print(f"\nspeedup (pure / compiled): {times['pure'] / times['compiled']:.1f}x")


if __name__ == "__main__":
    main()
