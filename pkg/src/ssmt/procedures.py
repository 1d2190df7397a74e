"""Rejection procedures: step-up BH and its semi-supervised variants.

``ss_bh`` is the workhorse: BH applied to conservative empirical p-values,
implemented as a single descending merge scan over the pooled sample so the
whole thing costs O((n+m) log(n+m)). Its rejection set is contractually
identical (bitwise, as an index set) to ``bh_stepup`` on
``conservative_empirical_pvalues`` — both paths share the same step-up
kernel so no float comparison can disagree.

Also here: the harmonic-corrected variant (valid under arbitrary p-value
dependence), the split-NTS baseline, the blackbox variant that sizes its own
NTS so the FDR bound is achieved exactly, the randomized variant for
negatively equicorrelated Gaussians, and an oracle local-fdr comparator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DataError
from .pvalues import PValues, as_statistics, conservative_empirical_pvalues


@dataclass(frozen=True)
class RejectionSet:
    """Indices rejected by a procedure (0-based, sorted ascending).

    ``threshold_p`` is the largest rejected p-value (0.0 when nothing is
    rejected).
    """

    indices: np.ndarray
    k_hat: int
    threshold_p: float

    def __len__(self) -> int:
        return self.k_hat

    def same_indices(self, other: "RejectionSet") -> bool:
        return np.array_equal(self.indices, other.indices)


@dataclass(frozen=True)
class SsBhDiagnostics:
    """State of the merge scan at its stopping point.

    K rejected test statistics, V NTS values at or above the rejection
    threshold, the estimated-FDP values visited while scanning down from
    K = m (ending with the conventional 1.0 when the scan exhausts all test
    values), and the stopping position in the merged descending order
    (stop_index = K + V).
    """

    K: int
    V: int
    fdp_path: np.ndarray
    stop_index: int

    @property
    def fdp_hat(self) -> float:
        return float(self.fdp_path[-1])


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return alpha


def _stepup_k(p_sorted: np.ndarray, alpha: float) -> int:
    """Largest k with p_(k) <= alpha*k/m, given ascending p; 0 if none.

    Single comparison kernel shared by every BH-type entry point so that
    equivalent procedures agree bitwise.
    """
    m = p_sorted.size
    ok = p_sorted <= alpha * np.arange(1, m + 1) / m
    hits = np.flatnonzero(ok)
    return int(hits[-1]) + 1 if hits.size else 0


def bh_stepup(p, alpha: float) -> RejectionSet:
    """Step-up BH at level alpha on a p-value vector.

    Rejects the k-hat smallest p-values where k-hat is the largest k with
    p_(k) <= alpha*k/m; with ties the rejected set is still exactly of size
    k-hat (a tie crossing the threshold would contradict maximality).
    """
    alpha = _check_alpha(alpha)
    values = p.values if isinstance(p, PValues) else np.asarray(p, dtype=float)
    if values.size < 1:
        raise DataError("empty p-value vector")
    if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
        raise DataError("p-values must lie in [0, 1]")
    m = values.size
    k_hat = _stepup_k(np.sort(values), alpha)
    if k_hat == 0:
        return RejectionSet(np.empty(0, dtype=np.intp), 0, 0.0)
    thresh = alpha * k_hat / m
    idx = np.flatnonzero(values <= thresh)
    return RejectionSet(idx, k_hat, float(np.max(values[idx])))


def ss_bh(x, y, alpha: float) -> tuple[RejectionSet, SsBhDiagnostics]:
    """Semi-supervised BH: BH on conservative empirical p-values.

    Merge scan over the pooled sample in descending order (NTS entries above
    test entries on ties, so tied y's count into V): for K = m, m-1, ... the
    estimated FDP is ((V_K + 1)/(n + 1)) * (m/K) with V_K = #{y_j >= x_(K)},
    and the scan stops at the first K where it drops to alpha or below.
    Evaluating only at test positions is sufficient: between them the FDP is
    never smaller than at the next test position.
    """
    alpha = _check_alpha(alpha)
    x = as_statistics(x, "x")
    y = as_statistics(y, "y (null training sample)")
    n, m = y.size, x.size

    xs_desc = np.sort(x)[::-1]
    y_sorted = np.sort(y)
    # V_K = #{y >= K-th largest x}; ties count (side='left' counts y < x).
    v = n - np.searchsorted(y_sorted, xs_desc, side="left")
    p_sorted = (v + 1) / (n + 1)  # ascending: the sorted conservative p-values
    k_hat = _stepup_k(p_sorted, alpha)

    fdp_at = p_sorted * (m / np.arange(1, m + 1))
    if k_hat == 0:
        path = np.append(fdp_at[::-1], 1.0)  # K = m down to 1, then K = 0
        diags = SsBhDiagnostics(K=0, V=int(v[0]), fdp_path=path,
                                stop_index=int(v[0]))
        return RejectionSet(np.empty(0, dtype=np.intp), 0, 0.0), diags

    idx = np.flatnonzero(x >= xs_desc[k_hat - 1])
    v_stop = int(v[k_hat - 1])
    path = fdp_at[k_hat - 1:][::-1]  # visited K = m, m-1, ..., k_hat
    diags = SsBhDiagnostics(K=k_hat, V=v_stop, fdp_path=path,
                            stop_index=k_hat + v_stop)
    return RejectionSet(idx, k_hat, float(p_sorted[k_hat - 1])), diags


def harmonic_number(m: int) -> float:
    """c_m = 1 + 1/2 + ... + 1/m by direct summation."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return float(sum(1.0 / i for i in range(1, m + 1)))


def by_procedure(x, y, alpha: float) -> RejectionSet:
    """Harmonic-corrected semi-supervised BH (valid under any dependence).

    Runs ss_bh at the reduced level alpha / c_m with c_m = 1 + ... + 1/m.
    """
    alpha = _check_alpha(alpha)
    x = as_statistics(x, "x")
    rejections, _ = ss_bh(x, y, alpha / harmonic_number(x.size))
    return rejections


def split_bh(x, y, alpha: float) -> RejectionSet:
    """BH on empirical p-values computed from disjoint NTS blocks.

    The NTS is cut, in its given order, into m consecutive blocks of size
    floor(n/m) (trailing remainder discarded); p-value i uses block i alone
    via the conservative formula. Independence of the p-values is restored
    at the price of a much coarser granularity 1/(floor(n/m)+1).
    """
    alpha = _check_alpha(alpha)
    x = as_statistics(x, "x")
    y = as_statistics(y, "y (null training sample)")
    m = x.size
    block = y.size // m
    if block < 1:
        raise DataError(
            f"split procedure needs n >= m (got n={y.size}, m={m})")
    blocks = y[:m * block].reshape(m, block)
    counts = np.sum(blocks >= x[:, None], axis=1)
    p = (counts + 1) / (block + 1)
    return bh_stepup(p, alpha)


def _reduced_fraction(alpha_num: int, alpha_den: int) -> Fraction:
    if alpha_den <= 0 or alpha_num <= 0:
        raise ValueError("alpha fraction must have positive terms")
    frac = Fraction(alpha_num, alpha_den)
    if not Fraction(0, 1) < frac < Fraction(1, 1):
        raise ValueError(f"alpha must be in (0, 1), got {frac}")
    return frac


def blackbox_n(alpha_num: int, alpha_den: int, m: int) -> int:
    """Smallest NTS size n >= 1 making (n+1)*alpha/m an integer.

    alpha = a/b reduced: n + 1 must be a multiple of b*m / gcd(a, m), found
    by gcd arithmetic (never a floating-point scan).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    frac = _reduced_fraction(alpha_num, alpha_den)
    a, b = frac.numerator, frac.denominator
    period = b * m // math.gcd(a, b * m)
    return period - 1


def blackbox_bh(x, alpha_num: int, alpha_den: int, sampler,
                rng: np.random.Generator) -> tuple[RejectionSet, int]:
    """Semi-supervised BH with a self-sized NTS drawn from a null sampler.

    ``sampler(size, rng)`` must return i.i.d. null draws. The NTS size is
    blackbox_n(...), chosen so the FDR bound is achieved exactly. Alpha must
    be supplied as a fraction; the result is deterministic given (rng state,
    x).
    """
    x = as_statistics(x, "x")
    frac = _reduced_fraction(alpha_num, alpha_den)
    n = blackbox_n(frac.numerator, frac.denominator, x.size)
    y = np.asarray(sampler(n, rng), dtype=float)
    if y.shape != (n,):
        raise DataError(f"sampler returned shape {y.shape}, expected ({n},)")
    rejections, _ = ss_bh(x, y, float(frac))
    return rejections, n


_ADMISSIBILITY_TOL = 1e-9


def equicorrelated_extend(t, rho: float, target_len: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Append coordinates to an equicorrelated standard Gaussian vector.

    Input shape (..., k0); the recursion extends along the last axis until
    ``target_len``, drawing one fresh N(0,1) per step:

        T_new = rho/(1+(k-1)rho) * (T_1+...+T_k)
                + sqrt(1 - k*rho^2/(1+(k-1)rho)) * U

    The running sums are carried incrementally (O(1) per coordinate per
    batch row). Requires rho >= -1/(target_len - 1); at that boundary the
    innovation scale for the final coordinate is exactly 0, so tiny negative
    square-root arguments from float rho are clamped.
    """
    t = np.asarray(t, dtype=float)
    k0 = t.shape[-1]
    if target_len < k0:
        raise ValueError("target_len must be >= current length")
    if target_len == k0:
        return t.copy()
    if target_len > 1 and rho * (target_len - 1) < -1.0 - _ADMISSIBILITY_TOL:
        raise ValueError(
            f"rho={rho} inadmissible for length {target_len} "
            f"(needs rho >= -1/{target_len - 1})")

    out = np.empty(t.shape[:-1] + (target_len,), dtype=float)
    out[..., :k0] = t
    total = t.sum(axis=-1)
    noise = rng.standard_normal(t.shape[:-1] + (target_len - k0,))
    for k in range(k0, target_len):
        denom = 1.0 + (k - 1) * rho
        arg = 1.0 - k * rho * rho / denom
        if arg < 0.0:
            if arg < -_ADMISSIBILITY_TOL:
                raise ValueError(
                    f"rho={rho} inadmissible at extension step {k + 1}")
            arg = 0.0
        new = (rho / denom) * total + math.sqrt(arg) * noise[..., k - k0]
        out[..., k] = new
        total = total + new
    return out


def randomized_n(rho: float, m: int) -> int:
    """Largest NTS size keeping the (n+m)-vector rho-equicorrelation valid.

    n = floor(-1/rho - m + 1); a small tolerance keeps real-valued
    boundaries (e.g. rho = -0.01, m = 10 -> n = 91) intact despite binary
    floats.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not -1.0 / m <= rho < 0.0:
        raise ValueError(f"rho must lie in [-1/m, 0), got {rho} for m={m}")
    n = math.floor(-1.0 / rho - m + 1.0 + _ADMISSIBILITY_TOL)
    return n


def randomized_bh(x, rho: float, alpha: float, rng: np.random.Generator,
                  n_max: int = 10_000_000) -> tuple[RejectionSet, int]:
    """BH made robust to known negative equicorrelation by randomization.

    For x jointly rho-equicorrelated standard Gaussian under the null,
    draws n = floor(-1/rho - m + 1) extra coordinates so that (y, x) is
    exchangeable, then applies ss_bh. As rho -> 0 the required n diverges;
    requests above ``n_max`` are refused rather than silently truncated.
    """
    alpha = _check_alpha(alpha)
    x = as_statistics(x, "x")
    n = randomized_n(rho, x.size)
    if n < 1:
        raise ValueError(f"rho={rho} too negative for m={x.size}: no valid NTS size")
    if n > n_max:
        raise ValueError(
            f"rho={rho} requires n={n} > n_max={n_max}; raise n_max explicitly")
    extended = equicorrelated_extend(x, rho, x.size + n, rng)
    y = extended[x.size:]
    rejections, _ = ss_bh(x, y, alpha)
    return rejections, n


def locfdr_oracle(t, g0, g1, pi0: float, alpha: float) -> RejectionSet:
    """Oracle local-fdr comparator for the two-group model.

    lfdr_i = pi0*g0(t_i) / (pi0*g0(t_i) + (1-pi0)*g1(t_i)); sorts the lfdr
    ascending (ties broken by original index) and rejects the largest prefix
    whose running mean stays at or below alpha. This rejection rule is a
    comparator convention, reported as such.
    """
    alpha = _check_alpha(alpha)
    t = as_statistics(t, "t")
    if not 0.0 <= pi0 <= 1.0:
        raise ValueError(f"pi0 must be in [0, 1], got {pi0}")
    g0v = np.asarray(g0(t), dtype=float)
    g1v = np.asarray(g1(t), dtype=float)
    denom = pi0 * g0v + (1.0 - pi0) * g1v
    if np.any(denom <= 0.0):
        bad = int(np.flatnonzero(denom <= 0.0)[0])
        raise DataError(f"both densities vanish at t[{bad}]={t[bad]}: lfdr undefined")
    lfdr = pi0 * g0v / denom
    order = np.argsort(lfdr, kind="stable")
    running_mean = np.cumsum(lfdr[order]) / np.arange(1, t.size + 1)
    hits = np.flatnonzero(running_mean <= alpha)
    k = int(hits[-1]) + 1 if hits.size else 0
    if k == 0:
        return RejectionSet(np.empty(0, dtype=np.intp), 0, 0.0)
    idx = np.sort(order[:k])
    return RejectionSet(idx, k, float(lfdr[order[k - 1]]))
