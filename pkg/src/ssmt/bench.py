"""Throughput benchmark for the sort-and-scan path at application scale."""

from __future__ import annotations

import time
import tracemalloc
from statistics import median

import numpy as np

from .procedures import ss_bh
from .pvalues import conservative_empirical_pvalues


def run_bench(n: int, m: int, alpha: float = 0.2, runs: int = 5,
              seed: int = 0) -> dict:
    """Time conservative p-values and ss_bh on one synthetic full-null sample.

    The dataset is drawn once from the seed, so repeated runs report
    identical K and V. Returns median wall times over ``runs`` passes and
    the peak traced allocation of one extra pass of each stage.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n)
    x = rng.standard_normal(m)

    # one untimed pass warms caches/allocator so medians measure steady state
    conservative_empirical_pvalues(x, y)
    ss_bh(x, y, alpha)

    pvalue_times, ssbh_times = [], []
    for _ in range(runs):
        t0 = time.perf_counter()
        conservative_empirical_pvalues(x, y)
        pvalue_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        rejections, diags = ss_bh(x, y, alpha)
        ssbh_times.append(time.perf_counter() - t0)

    tracemalloc.start()
    conservative_empirical_pvalues(x, y)
    _, peak_pvalues = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    tracemalloc.start()
    ss_bh(x, y, alpha)
    _, peak_ssbh = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    return {
        "n": n, "m": m, "alpha": alpha, "runs": runs, "seed": seed,
        "pvalues_median_s": median(pvalue_times),
        "ss_bh_median_s": median(ssbh_times),
        "pvalues_peak_bytes": peak_pvalues,
        "ss_bh_peak_bytes": peak_ssbh,
        "K": rejections.k_hat, "V": diags.V,
    }
