import math

import numpy as np
import pytest

from ssmt import (DataError, bh_stepup, blackbox_bh, blackbox_n, by_procedure,
                  conservative_empirical_pvalues, equicorrelated_extend,
                  harmonic_number, locfdr_oracle, randomized_bh, randomized_n,
                  split_bh, ss_bh)


def brute_force_bh(p, alpha):
    """Quadratic scan straight off the step-up definition."""
    p = np.asarray(p, dtype=float)
    m = p.size
    ps = np.sort(p)
    k_hat = 0
    for k in range(1, m + 1):
        if ps[k - 1] <= alpha * k / m:
            k_hat = k
    if k_hat == 0:
        return np.array([], dtype=int)
    return np.flatnonzero(p <= alpha * k_hat / m)


# ---------------------------------------------------------------- bh_stepup

def test_bh_hand_example():
    r = bh_stepup([0.01, 0.04, 0.2], 0.15)
    assert r.k_hat == 2
    assert list(r.indices) == [0, 1]
    assert r.threshold_p == pytest.approx(0.04)


def test_bh_all_ones_rejects_nothing():
    r = bh_stepup(np.ones(5), 0.9)
    assert r.k_hat == 0
    assert r.indices.size == 0
    assert r.threshold_p == 0.0


def test_bh_saturation():
    m = 6
    r = bh_stepup(np.full(m, 0.3 / m / 2), 0.3)
    assert r.k_hat == m


def test_bh_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(300):
        m = int(rng.integers(1, 40))
        p = rng.uniform(size=m)
        if rng.random() < 0.3:
            p = np.round(p, 1)
        alpha = float(rng.uniform(0.02, 0.98))
        r = bh_stepup(p, alpha)
        assert np.array_equal(r.indices, brute_force_bh(p, alpha))


def test_bh_parameter_errors():
    with pytest.raises(ValueError):
        bh_stepup([0.5], 1.0)
    with pytest.raises(ValueError):
        bh_stepup([0.5], 0.0)
    with pytest.raises(DataError):
        bh_stepup([1.2], 0.5)


# --------------------------------------------------------------------- ss_bh

def test_ss_bh_hand_trace():
    rejections, diags = ss_bh([4.0, 0.5], [1.0, 2.0, 3.0], 0.5)
    assert list(rejections.indices) == [0]
    assert diags.K == 1 and diags.V == 0
    assert diags.stop_index == 1
    assert diags.fdp_hat == pytest.approx((0 + 1) / 4 * 2 / 1)
    # independent route: BH on p_hat = (1/4, 1)
    assert np.array_equal(
        rejections.indices,
        bh_stepup(conservative_empirical_pvalues([4.0, 0.5], [1.0, 2.0, 3.0]),
                  0.5).indices)


def test_ss_bh_merge_scan_worked_interleaving():
    # m=14, n=17, alpha=0.2; descending merged order places two NTS values
    # among the top 12 tests and a third just below them, so the scan stops
    # at K=12 with V=2 and estimated FDP = (3/18)*(14/12) <= 0.2 while both
    # earlier test positions exceed 0.2.
    values = -np.arange(31.0)  # strictly decreasing merged order
    labels = (["x"] * 6 + ["y"] + ["x"] * 5 + ["y"] + ["x"]          # top 14
              + ["y"] + ["x", "x"] + ["y"] * 14)
    x = np.array([v for v, l in zip(values, labels) if l == "x"])
    y = np.array([v for v, l in zip(values, labels) if l == "y"])
    assert x.size == 14 and y.size == 17
    rejections, diags = ss_bh(x, y, 0.2)
    assert diags.K == 12 and diags.V == 2
    assert diags.stop_index == 14
    fdp = diags.fdp_hat
    assert fdp == pytest.approx(3 / 18 * 14 / 12)
    assert fdp <= 0.2
    assert diags.fdp_path[-2] > 0.2 and diags.fdp_path[-3] > 0.2
    assert rejections.k_hat == 12


def test_ss_bh_all_x_below_y_empty():
    rejections, diags = ss_bh([-5.0, -6.0], [1.0, 2.0], 0.5)
    assert rejections.k_hat == 0
    assert diags.K == 0
    assert diags.fdp_path[-1] == 1.0


def test_ss_bh_equals_bh_on_conservative_pvalues_fuzz():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        m = int(rng.integers(1, 60))
        n = int(rng.integers(1, 60))
        x = rng.normal(size=m)
        y = rng.normal(size=n)
        if rng.random() < 0.3:
            x, y = np.round(x, 1), np.round(y, 1)
        alpha = float(rng.uniform(0.02, 0.98))
        direct, _ = ss_bh(x, y, alpha)
        via_bh = bh_stepup(conservative_empirical_pvalues(x, y), alpha)
        assert np.array_equal(direct.indices, via_bh.indices)
        assert direct.k_hat == via_bh.k_hat
        assert direct.threshold_p == via_bh.threshold_p


def test_stepup_monotone_in_alpha():
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = rng.normal(size=20)
        y = rng.normal(size=15)
        a1, a2 = sorted(rng.uniform(0.05, 0.95, size=2))
        r1, _ = ss_bh(x, y, a1)
        r2, _ = ss_bh(x, y, a2)
        assert set(r1.indices) <= set(r2.indices)


def test_min_pvalue_barrier():
    # 1/(n+1) > alpha means no rejection is ever possible
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.normal(size=10) + 5.0  # strong signal, still blocked
        y = rng.normal(size=1)
        rejections, _ = ss_bh(x, y, 0.4)
        assert rejections.k_hat == 0


def test_ss_bh_deterministic():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=50), rng.normal(size=30)
    a = ss_bh(x, y, 0.3)
    b = ss_bh(x, y, 0.3)
    assert np.array_equal(a[0].indices, b[0].indices)
    assert np.array_equal(a[1].fdp_path, b[1].fdp_path)


# ------------------------------------------------------------ by / split

def test_harmonic_number():
    assert harmonic_number(3) == pytest.approx(11 / 6)
    assert harmonic_number(1) == 1.0


def test_by_equals_ss_bh_at_reduced_level():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=12), rng.normal(size=20)
    r_by = by_procedure(x, y, 0.4)
    r_ss, _ = ss_bh(x, y, 0.4 / harmonic_number(12))
    assert np.array_equal(r_by.indices, r_ss.indices)


def test_by_subset_of_ss_bh():
    rng = np.random.default_rng(6)
    for _ in range(100):
        x, y = rng.normal(size=10), rng.normal(size=25)
        r_by = by_procedure(x, y, 0.5)
        r_ss, _ = ss_bh(x, y, 0.5)
        assert set(r_by.indices) <= set(r_ss.indices)


def test_by_m1_identical_to_ss_bh():
    rng = np.random.default_rng(7)
    x, y = rng.normal(size=1), rng.normal(size=5)
    assert np.array_equal(by_procedure(x, y, 0.3).indices,
                          ss_bh(x, y, 0.3)[0].indices)


def test_split_block_granularity():
    rng = np.random.default_rng(8)
    m = 6
    x, y = rng.normal(size=m), rng.normal(size=m)  # block size 1
    blocks = y[:m].reshape(m, 1)
    p = (np.sum(blocks >= x[:, None], axis=1) + 1) / 2
    assert set(np.unique(p)) <= {0.5, 1.0}
    split_bh(x, y, 0.5)  # just exercises the path


def test_split_remainder_discarded():
    # n = 2m+1: block size 2, the last value is never consulted
    rng = np.random.default_rng(9)
    m = 5
    x = rng.normal(size=m)
    y = rng.normal(size=2 * m + 1)
    y_mutated = y.copy()
    y_mutated[-1] = 1e6
    a = split_bh(x, y, 0.4)
    b = split_bh(x, y_mutated, 0.4)
    assert np.array_equal(a.indices, b.indices)


def test_split_m1_equals_ss_bh():
    rng = np.random.default_rng(10)
    x, y = rng.normal(size=1), rng.normal(size=7)
    assert np.array_equal(split_bh(x, y, 0.3).indices,
                          ss_bh(x, y, 0.3)[0].indices)


def test_split_insufficient_nts():
    with pytest.raises(DataError):
        split_bh(np.zeros(5), np.zeros(4), 0.3)


def test_split_coarser_than_ss_bh_granularity():
    rng = np.random.default_rng(11)
    m, n = 4, 21
    x, y = rng.normal(size=m), rng.normal(size=n)
    block = n // m
    blocks = y[:m * block].reshape(m, block)
    p_split = (np.sum(blocks >= x[:, None], axis=1) + 1) / (block + 1)
    p_full = conservative_empirical_pvalues(x, y).values
    assert np.all(np.isin(np.round(p_split * (block + 1)),
                          np.arange(1, block + 2)))
    assert np.all(np.isin(np.round(p_full * (n + 1)), np.arange(1, n + 2)))


# ------------------------------------------------------------- blackbox

def test_blackbox_n_examples():
    assert blackbox_n(1, 2, 2) == 3
    assert blackbox_n(1, 5, 3) == 14
    assert blackbox_n(1, 2, 1) == 1


def test_blackbox_n_normalizes_fraction():
    assert blackbox_n(2, 4, 2) == blackbox_n(1, 2, 2)


def test_blackbox_n_rejects_bad_alpha():
    with pytest.raises(ValueError):
        blackbox_n(3, 2, 5)
    with pytest.raises(ValueError):
        blackbox_n(0, 2, 5)


def test_blackbox_n_matches_brute_scan():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 40:
        b = int(rng.integers(2, 60))
        a = int(rng.integers(1, b))
        m = int(rng.integers(1, 40))
        if math.gcd(a, b) != 1:
            continue
        expected = None
        for n in range(1, 10_000):
            if ((n + 1) * a) % (b * m) == 0:
                expected = n
                break
        assert blackbox_n(a, b, m) == expected
        checked += 1


def test_blackbox_bh_deterministic_and_sized():
    x = np.array([2.0, -1.0])

    def sampler(size, rng):
        return rng.standard_normal(size)

    r1, n1 = blackbox_bh(x, 1, 2, sampler, np.random.default_rng(7))
    r2, n2 = blackbox_bh(x, 1, 2, sampler, np.random.default_rng(7))
    assert n1 == n2 == 3
    assert np.array_equal(r1.indices, r2.indices)


# -------------------------------------------------- equicorrelated extension

def test_extend_identity_when_target_equals_length():
    t = np.array([1.0, -0.5])
    out = equicorrelated_extend(t, -0.1, 2, np.random.default_rng(0))
    assert np.array_equal(out, t)
    assert out is not t


def test_extend_rho_zero_reduces_to_fresh_normals():
    rng = np.random.default_rng(1)
    draws = np.random.default_rng(1).standard_normal(3)
    out = equicorrelated_extend(np.array([5.0]), 0.0, 4, rng)
    assert np.allclose(out[1:], draws)
    assert out[0] == 5.0


def test_extend_inadmissible_rho_raises():
    with pytest.raises(ValueError):
        equicorrelated_extend(np.zeros(2), -0.5, 4, np.random.default_rng(0))


def test_extend_boundary_rho_exact():
    # rho = -1/(d-1) is admissible; the final innovation scale is zero
    d = 5
    out = equicorrelated_extend(np.zeros(1), -1.0 / (d - 1), d,
                                np.random.default_rng(2))
    assert out.shape == (d,)
    assert np.all(np.isfinite(out))


def test_extend_batched_covariance_small():
    reps, rho, d = 40_000, -0.1, 6
    rng = np.random.default_rng(3)
    start = rng.standard_normal((reps, 1))
    out = equicorrelated_extend(start, rho, d, rng)
    cov = np.cov(out, rowvar=False)
    se_off = math.sqrt((1 + rho * rho) / reps)
    se_diag = math.sqrt(2.0 / reps)
    for i in range(d):
        for j in range(d):
            target = 1.0 if i == j else rho
            se = se_diag if i == j else se_off
            assert abs(cov[i, j] - target) <= 4 * se


# ------------------------------------------------------------- randomized

def test_randomized_n_examples():
    assert randomized_n(-0.01, 10) == 91
    assert randomized_n(-0.1, 10) == 1


def test_randomized_n_domain():
    with pytest.raises(ValueError):
        randomized_n(-0.3, 10)  # below -1/m
    with pytest.raises(ValueError):
        randomized_n(0.0, 10)


def test_randomized_bh_n_cap():
    with pytest.raises(ValueError):
        randomized_bh(np.zeros(10), -1e-9, 0.5, np.random.default_rng(0),
                      n_max=1000)


def test_randomized_bh_returns_n_used():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(10)
    _, n_used = randomized_bh(x, -0.01, 0.5, np.random.default_rng(5))
    assert n_used == 91


# ---------------------------------------------------------------- locfdr

def _norm_pdf(mu):
    return lambda u: np.exp(-0.5 * (np.asarray(u) - mu) ** 2) / np.sqrt(2 * np.pi)


def brute_force_locfdr(lfdr, alpha):
    order = np.argsort(lfdr, kind="stable")
    best = 0
    for k in range(1, lfdr.size + 1):
        if np.mean(lfdr[order[:k]]) <= alpha:
            best = k
    return np.sort(order[:best])


def test_locfdr_pi0_extremes():
    t = np.array([0.0, 1.0, 2.0])
    empty = locfdr_oracle(t, _norm_pdf(0), _norm_pdf(3), pi0=1.0, alpha=0.5)
    assert empty.k_hat == 0
    everything = locfdr_oracle(t, _norm_pdf(0), _norm_pdf(3), pi0=0.0, alpha=0.5)
    assert everything.k_hat == 3


def test_locfdr_matches_brute_force_two_group():
    rng = np.random.default_rng(13)
    m, pi0, mu = 50, 0.9, 3.0
    labels = rng.random(m) < pi0
    t = np.where(labels, rng.standard_normal(m), rng.standard_normal(m) + mu)
    g0, g1 = _norm_pdf(0.0), _norm_pdf(mu)
    lfdr = pi0 * g0(t) / (pi0 * g0(t) + (1 - pi0) * g1(t))
    r = locfdr_oracle(t, g0, g1, pi0=pi0, alpha=0.2)
    assert np.array_equal(r.indices, brute_force_locfdr(lfdr, 0.2))


def test_locfdr_undefined_when_densities_vanish():
    with pytest.raises(DataError):
        locfdr_oracle([0.0], lambda u: np.zeros_like(np.asarray(u, float)),
                      lambda u: np.zeros_like(np.asarray(u, float)),
                      pi0=0.5, alpha=0.2)
