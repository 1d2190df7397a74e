"""Monte-Carlo evaluation of the procedures: FDR/TDR with uncertainty.

Replicates are independent jobs keyed by their index; no matter how many
workers run them, the aggregation is an ordered fold over replicate indices
into preallocated arrays, so summaries are identical across thread counts.
Each summary reports both the spread of the realized proportions (sd_fdp,
sd_tdp) and the standard errors of the Monte-Carlo estimates
(se = sd / sqrt(reps)).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datagen import (LRT_TWO_GROUP, Dataset, ScenarioSpec, generate,
                      null_model_for)
from .procedures import (RejectionSet, bh_stepup, by_procedure, locfdr_oracle,
                         split_bh, ss_bh)
from .pvalues import (NullModel, conservative_empirical_pvalues,
                      naive_empirical_pvalues, oracle_pvalues)

log = logging.getLogger(__name__)

PROCEDURES = ("ss_bh", "oracle", "naive_bh", "by", "split", "locfdr")


def fdp(rejections: RejectionSet, h0_mask) -> float:
    """False discovery proportion: false rejections over max(1, |R|)."""
    h0_mask = np.asarray(h0_mask, dtype=bool)
    false_count = int(np.count_nonzero(h0_mask[rejections.indices]))
    return false_count / max(1, rejections.k_hat)


def tdp(rejections: RejectionSet, h0_mask) -> float:
    """True discovery proportion: true rejections over max(1, m1)."""
    h0_mask = np.asarray(h0_mask, dtype=bool)
    m1 = int(np.count_nonzero(~h0_mask))
    true_count = rejections.k_hat - int(np.count_nonzero(h0_mask[rejections.indices]))
    return true_count / max(1, m1)


@dataclass(frozen=True)
class ReplicateOutcome:
    """One (replicate, procedure) row of a Monte-Carlo run.

    ``contained`` flags whether the relaxed-level oracle rejections were a
    subset of this procedure's rejections in this replicate; ``oracle_tdp``
    is the TDP of that relaxed oracle.
    """

    replicate: int
    procedure: str
    fdp: float
    tdp: float
    rejections: int
    contained: bool
    oracle_tdp: float


@dataclass(frozen=True)
class MetricsSummary:
    """Per-procedure Monte-Carlo estimates with uncertainty."""

    procedure: str
    fdr_hat: float
    se_fdr: float
    sd_fdp: float
    tdr_hat: float
    se_tdr: float
    sd_tdp: float
    reps: int


@dataclass
class MonteCarloResult:
    spec: ScenarioSpec
    procedures: tuple[str, ...]
    reps: int
    eta: float
    summaries: list[MetricsSummary]
    arrays: dict[str, dict[str, np.ndarray]]
    oracle_prime_tdp: np.ndarray
    failures: int

    def summary(self, procedure: str) -> MetricsSummary:
        for s in self.summaries:
            if s.procedure == procedure:
                return s
        raise KeyError(procedure)

    def outcomes(self, procedure: str | None = None) -> list[ReplicateOutcome]:
        """Materialize ReplicateOutcome rows, ordered by replicate."""
        procs = self.procedures if procedure is None else (procedure,)
        rows = []
        for r in range(self.reps):
            for name in procs:
                a = self.arrays[name]
                rows.append(ReplicateOutcome(
                    replicate=r, procedure=name,
                    fdp=float(a["fdp"][r]), tdp=float(a["tdp"][r]),
                    rejections=int(a["rejections"][r]),
                    contained=bool(a["contained"][r]),
                    oracle_tdp=float(self.oracle_prime_tdp[r])))
        return rows


def _run_procedure(name: str, ds: Dataset, alpha: float,
                   null_model: NullModel, spec: ScenarioSpec) -> RejectionSet:
    if name == "ss_bh":
        return ss_bh(ds.x, ds.y, alpha)[0]
    if name == "oracle":
        return bh_stepup(oracle_pvalues(ds.x, null_model), alpha)
    if name == "naive_bh":
        return bh_stepup(naive_empirical_pvalues(ds.x, ds.y), alpha)
    if name == "by":
        return by_procedure(ds.x, ds.y, alpha)
    if name == "split":
        return split_bh(ds.x, ds.y, alpha)
    if name == "locfdr":
        if spec.family != LRT_TWO_GROUP or ds.t is None:
            raise ValueError("locfdr comparator needs the LRT two-group family")
        mu = spec.effect
        return locfdr_oracle(
            ds.t,
            g0=lambda u: np.exp(-0.5 * u * u) / np.sqrt(2 * np.pi),
            g1=lambda u: np.exp(-0.5 * (u - mu) ** 2) / np.sqrt(2 * np.pi),
            pi0=spec.pi0_effective, alpha=alpha)
    raise ValueError(f"unknown procedure {name!r}; choose from {PROCEDURES}")


def _is_subset(small: np.ndarray, big: np.ndarray) -> bool:
    if small.size == 0:
        return True
    if small.size > big.size:
        return False
    pos = np.searchsorted(big, small)
    if np.any(pos >= big.size):
        return False
    return bool(np.all(big[pos] == small))


def _run_chunk(spec: ScenarioSpec, procedures: tuple[str, ...], alpha: float,
               eta: float, start: int, stop: int) -> dict:
    """Replicates [start, stop): pure function of its arguments."""
    null_model = null_model_for(spec)
    count = stop - start
    out = {name: {
        "fdp": np.empty(count), "tdp": np.empty(count),
        "rejections": np.zeros(count, dtype=np.int64),
        "contained": np.zeros(count, dtype=bool),
    } for name in procedures}
    oracle_prime_tdp = np.empty(count)
    failures = 0

    alpha_prime = alpha * (1.0 - eta)
    for j in range(count):
        ds = generate(spec, start + j)
        p_oracle = oracle_pvalues(ds.x, null_model)
        oracle_set = bh_stepup(p_oracle, alpha)
        prime_set = oracle_set if eta == 0.0 else bh_stepup(p_oracle, alpha_prime)
        oracle_prime_tdp[j] = tdp(prime_set, ds.h0_mask)
        for name in procedures:
            try:
                rej = oracle_set if name == "oracle" else _run_procedure(
                    name, ds, alpha, null_model, spec)
            except Exception:
                out[name]["fdp"][j] = np.nan
                out[name]["tdp"][j] = np.nan
                failures += 1
                continue
            out[name]["fdp"][j] = fdp(rej, ds.h0_mask)
            out[name]["tdp"][j] = tdp(rej, ds.h0_mask)
            out[name]["rejections"][j] = rej.k_hat
            out[name]["contained"][j] = _is_subset(prime_set.indices, rej.indices)
    return {"arrays": out, "oracle_prime_tdp": oracle_prime_tdp,
            "failures": failures}


_CHUNK = 2048


def monte_carlo(spec: ScenarioSpec, procedures=("ss_bh", "oracle"),
                reps: int = 1000, eta: float = 0.0,
                threads: int = 1) -> MonteCarloResult:
    """Estimate FDR/TDR of the requested procedures over seeded replicates.

    The relaxed oracle at level alpha*(1-eta) is always evaluated (it feeds
    the containment/dominance columns); eta = 0 compares against the oracle
    at the same level. ``threads`` counts worker processes (0 = all cores);
    chunking is fixed so results never depend on it. Procedure failures are
    counted, logged, and excluded replicate-wise from that procedure's
    summary.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must be in [0, 1), got {eta}")
    procedures = tuple(procedures)
    alpha = spec.alpha

    arrays = {name: {
        "fdp": np.empty(reps), "tdp": np.empty(reps),
        "rejections": np.zeros(reps, dtype=np.int64),
        "contained": np.zeros(reps, dtype=bool),
    } for name in procedures}
    oracle_prime_tdp = np.empty(reps)
    failures = 0

    bounds = [(s, min(s + _CHUNK, reps)) for s in range(0, reps, _CHUNK)]
    if threads == 0:
        import os
        threads = os.cpu_count() or 1
    threads = max(1, min(threads, len(bounds)))

    def _fill(start: int, stop: int, chunk: dict):
        nonlocal failures
        for name in procedures:
            for key in arrays[name]:
                arrays[name][key][start:stop] = chunk["arrays"][name][key]
        oracle_prime_tdp[start:stop] = chunk["oracle_prime_tdp"]
        failures += chunk["failures"]

    if threads == 1:
        for start, stop in bounds:
            _fill(start, stop, _run_chunk(spec, procedures, alpha, eta, start, stop))
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [(start, stop,
                        pool.submit(_run_chunk, spec, procedures, alpha, eta,
                                    start, stop))
                       for start, stop in bounds]
            for start, stop, fut in futures:
                _fill(start, stop, fut.result())

    if failures:
        log.warning("monte_carlo: %d procedure failures over %d replicates",
                    failures, reps)

    summaries = []
    for name in procedures:
        a = arrays[name]
        summaries.append(_summarize(name, a["fdp"], a["tdp"]))
    return MonteCarloResult(spec=spec, procedures=procedures, reps=reps,
                            eta=eta, summaries=summaries, arrays=arrays,
                            oracle_prime_tdp=oracle_prime_tdp,
                            failures=failures)


def _summarize(name: str, fdp_arr: np.ndarray, tdp_arr: np.ndarray) -> MetricsSummary:
    good = np.isfinite(fdp_arr)
    reps = int(np.count_nonzero(good))
    f = fdp_arr[good]
    t = tdp_arr[good]
    sd_fdp = float(np.std(f, ddof=1)) if reps > 1 else 0.0
    sd_tdp = float(np.std(t, ddof=1)) if reps > 1 else 0.0
    root = np.sqrt(reps) if reps else 1.0
    return MetricsSummary(
        procedure=name,
        fdr_hat=float(np.mean(f)) if reps else np.nan,
        se_fdr=sd_fdp / root, sd_fdp=sd_fdp,
        tdr_hat=float(np.mean(t)) if reps else np.nan,
        se_tdr=sd_tdp / root, sd_tdp=sd_tdp,
        reps=reps)


def containment_frequency(outcomes) -> float:
    """Fraction of replicates where the relaxed oracle was contained."""
    flags = [o.contained for o in outcomes]
    if not flags:
        raise ValueError("no outcomes given")
    return float(np.mean(flags))


def tdp_dominance_frequency(outcomes) -> float:
    """Fraction of replicates where the relaxed oracle strictly beat the
    procedure on TDP."""
    flags = [o.oracle_tdp > o.tdp for o in outcomes]
    if not flags:
        raise ValueError("no outcomes given")
    return float(np.mean(flags))


def detectability_k(spec: ScenarioSpec, beta: float = 0.05,
                    reps: int = 2000, threads: int = 1) -> int:
    """Monte-Carlo estimate of the number of detectable alternatives.

    Returns the largest k in [0, m1] such that the oracle BH at level
    alpha/2 makes at most k-1 true discoveries with frequency <= beta
    (k = 0 when m1 = 0, m1 when beta = 1: the constraint is vacuous).
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if spec.m1 == 0:
        return 0
    half_spec = ScenarioSpec(m=spec.m, n=max(1, spec.n), m1=spec.m1,
                             family=spec.family, effect=spec.effect,
                             df=spec.df, pi0=spec.pi0,
                             alpha=spec.alpha / 2.0, seed=spec.seed)
    result = monte_carlo(half_spec, procedures=("oracle",), reps=reps,
                         threads=threads)
    a = result.arrays["oracle"]
    true_counts = np.round(a["tdp"] * spec.m1).astype(int)
    ks = np.arange(0, spec.m1 + 1)
    ecdf_km1 = np.mean(true_counts[:, None] <= (ks - 1)[None, :], axis=0)
    feasible = np.flatnonzero(ecdf_km1 <= beta)
    return int(feasible[-1]) if feasible.size else 0
