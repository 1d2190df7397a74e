import math
from fractions import Fraction

import numpy as np
import pytest

from ssmt import (classify_phase, fdr_bounds, gamma_lower_star, gamma_star,
                  phase_diagram, power_guarantee_prob, rule_of_thumb_n)
from ssmt.theory import (MIMIC_IMPOSSIBLE_GENERAL, MIMIC_POSSIBLE_FAVORABLE,
                         MIMIC_POSSIBLE_GENERAL, phase_rows)


def test_fdr_bounds_exact_point():
    b = fdr_bounds(0.5, n=3, m=2, m0=2)
    assert b.lower == pytest.approx(0.5)
    assert b.upper == pytest.approx(0.5)
    assert b.exact


def test_fdr_bounds_non_exact_point():
    b = fdr_bounds(0.2, n=10, m=4, m0=2)
    assert b.lower == 0.0
    assert b.upper == pytest.approx(0.1)
    assert not b.exact


def test_fdr_bounds_all_alternatives():
    b = fdr_bounds(0.3, n=5, m=4, m0=0)
    assert b.lower == 0.0 and b.upper == 0.0


def test_fdr_bounds_sandwich_always():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(1, 200))
        m = int(rng.integers(1, 50))
        m0 = int(rng.integers(0, m + 1))
        alpha = float(rng.uniform(0.01, 0.99))
        b = fdr_bounds(alpha, n, m, m0)
        assert 0.0 <= b.lower <= b.upper <= alpha + 1e-12
        if b.exact:
            assert b.lower == pytest.approx(b.upper)


def test_fdr_bounds_fraction_exactness_rule():
    # alpha = a/b exact iff b*m divides a*(n+1)
    rng = np.random.default_rng(1)
    for _ in range(200):
        b_den = int(rng.integers(2, 30))
        a_num = int(rng.integers(1, b_den))
        frac = Fraction(a_num, b_den)
        n = int(rng.integers(1, 100))
        m = int(rng.integers(1, 20))
        bounds = fdr_bounds(frac, n, m, m)
        expected = (frac.numerator * (n + 1)) % (frac.denominator * m) == 0
        assert bounds.exact == expected


def test_fdr_bounds_decimal_alpha_snaps_to_intended_rational():
    # 0.2 read as 1/5: alpha*(n+1)/m integral at n = 9, m = 1
    assert fdr_bounds(0.2, n=9, m=1, m0=1).exact
    assert not fdr_bounds(0.2, n=8, m=1, m0=1).exact


def test_gamma_star_values():
    assert gamma_star(0.5, 0.5) == pytest.approx(232.897, abs=1e-3)
    assert gamma_star(0.2, 0.5) == pytest.approx(582.24, abs=1e-2)


def test_gamma_star_homogeneous_in_alpha():
    assert gamma_star(0.25, 0.3) == pytest.approx(2 * gamma_star(0.5, 0.3))


def test_gamma_star_domain():
    with pytest.raises(ValueError):
        gamma_star(0.5, 0.0)
    with pytest.raises(ValueError):
        gamma_star(1.5, 0.5)


def test_gamma_lower_star_value():
    assert gamma_lower_star(0.2, 0.5) == pytest.approx(2.167e-4, rel=1e-3)


def test_gamma_lower_star_monotone_in_alpha_times_one_minus_eta():
    vals = [gamma_lower_star(a, 0.5) for a in (0.05, 0.1, 0.2)]
    assert vals[0] < vals[1] < vals[2]
    small = gamma_lower_star(0.01, 0.99)
    assert small < 1e-5


def test_gamma_lower_star_domain():
    with pytest.raises(ValueError):
        gamma_lower_star(0.3, 0.5)


def test_gamma_ordering_on_grid():
    for alpha in (0.01, 0.05, 0.1, 0.2, 0.24):
        for eta in (0.1, 0.3, 0.5, 0.7, 0.9):
            assert gamma_lower_star(alpha, eta) < gamma_star(alpha, eta)


def test_power_guarantee_prob_anchors():
    g = gamma_star(0.5, 0.5)
    assert power_guarantee_prob(g, 0.5, 0.5) == pytest.approx(3 / 4)
    assert power_guarantee_prob(g / 3, 0.5, 0.5) == 0.0
    assert power_guarantee_prob(1e9, 0.5, 0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        power_guarantee_prob(0.0, 0.5, 0.5)


def test_rule_of_thumb_values():
    assert rule_of_thumb_n(10, 0.5, 1) == pytest.approx(20.0)
    assert rule_of_thumb_n(1000, 0.2, 250) == pytest.approx(20.0)
    assert rule_of_thumb_n(1000, 0.2, 8) == pytest.approx(625.0)
    assert rule_of_thumb_n(10, 0.5, 0) == pytest.approx(20.0)  # max(1, k)


def test_classify_phase_star_point():
    pt = classify_phase(2_300_000, 3_300_000, 0.2, 100)
    assert pt.region == MIMIC_POSSIBLE_FAVORABLE


def test_classify_phase_boundary_inclusive():
    assert classify_phase(50, 10, 0.2, 0).region == MIMIC_POSSIBLE_GENERAL
    assert classify_phase(49, 10, 0.2, 0).region == MIMIC_IMPOSSIBLE_GENERAL


def test_classify_phase_k_equals_m_boundary():
    m = 10
    assert classify_phase(5, m, 0.2, m).region == MIMIC_POSSIBLE_FAVORABLE
    assert classify_phase(4, m, 0.2, m).region == MIMIC_IMPOSSIBLE_GENERAL


def test_classify_phase_monotone_in_n():
    rank = {MIMIC_IMPOSSIBLE_GENERAL: 0, MIMIC_POSSIBLE_FAVORABLE: 1,
            MIMIC_POSSIBLE_GENERAL: 2}
    rng = np.random.default_rng(2)
    for _ in range(200):
        m = int(rng.integers(1, 1000))
        k = int(rng.integers(0, 50))
        alpha = float(rng.choice([0.05, 0.1, 0.2, 0.5]))
        ns = np.sort(rng.integers(0, 5000, size=4))
        regions = [rank[classify_phase(int(n), m, alpha, k).region] for n in ns]
        assert all(a <= b for a, b in zip(regions, regions[1:]))


def test_phase_diagram_shape_and_reduction():
    pts = phase_diagram([10], 0.2, [3])
    assert len(pts) == 1
    single = pts[0]
    assert single.n == pytest.approx(10 / 0.2)
    assert single.region == classify_phase(single.n, 10, 0.2, 3).region

    pts = phase_diagram([1, 10, 100], 0.2, [3, 100])
    assert len(pts) == 6


def test_phase_rows_schema():
    rows = phase_rows(phase_diagram([10, 100], 0.2, [3]))
    assert list(rows[0]) == ["n", "m", "alpha", "k", "region", "rule_of_thumb_n"]
    for row in rows:
        assert row["rule_of_thumb_n"] == pytest.approx(
            row["m"] / (0.2 * max(1, row["k"])))
        assert row["n"] == pytest.approx(row["m"] / 0.2)


def test_phase_diagram_rejects_empty():
    with pytest.raises(ValueError):
        phase_diagram([], 0.2, [3])
