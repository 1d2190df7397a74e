"""Closed-form guarantees for the semi-supervised BH procedure.

Under exchangeability of the pooled null values, the FDR of ss_bh at level
alpha is sandwiched:

    (m0/(n+1)) * floor(alpha*(n+1)/m)  <=  FDR  <=  alpha * m0/m,

with equality on both sides exactly when alpha*(n+1)/m is an integer.

The power side is governed by the training-to-test ratio n/m: above
gamma_star(alpha, eta) the procedure provably contains the oracle BH at
level alpha*(1-eta) with probability >= 3/4, below gamma_lower_star no
procedure at all can mimic the oracle. The phase classification here uses
the constant-1 boundaries n = m/alpha and n = m/(alpha*k) that the
experiments support; the gamma constants carry the proven (constant-free)
statements and are exposed alongside, asserting neither as exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MIMIC_POSSIBLE_GENERAL = "MimicPossibleGeneral"
MIMIC_IMPOSSIBLE_GENERAL = "MimicImpossibleGeneral"
MIMIC_POSSIBLE_FAVORABLE = "MimicPossibleFavorable"

_LN2 = math.log(2.0)


def alpha_as_fraction(alpha) -> Fraction:
    """Exact rational view of a level.

    Fractions pass through untouched; floats are snapped to the nearest
    rational with denominator <= 1e9, which recovers the intended value for
    any level that was entered as a decimal or a small ratio.
    """
    if isinstance(alpha, Fraction):
        frac = alpha
    elif isinstance(alpha, int):
        frac = Fraction(alpha)
    else:
        frac = Fraction(float(alpha)).limit_denominator(10**9)
    if not Fraction(0) < frac < Fraction(1):
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    return frac


@dataclass(frozen=True)
class FdrBounds:
    """FDR sandwich for ss_bh; ``exact`` is the integer-condition flag."""

    lower: float
    upper: float
    exact: bool


def fdr_bounds(alpha, n: int, m: int, m0: int) -> FdrBounds:
    """Lower/upper FDR bounds of ss_bh for a cell (alpha, n, m, m0).

    The floor and the exactness test run in exact rational arithmetic
    (alpha = a/b: exact iff b*m divides a*(n+1)).
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not 0 <= m0 <= m:
        raise ValueError(f"m0 must be in [0, m], got {m0}")
    frac = alpha_as_fraction(alpha)
    a, b = frac.numerator, frac.denominator
    num = a * (n + 1)
    den = b * m
    floor_term = num // den
    lower = m0 * floor_term / (n + 1)
    upper = float(frac * m0 / m)
    return FdrBounds(lower=float(lower), upper=upper, exact=num % den == 0)


def gamma_star(alpha: float, eta: float) -> float:
    """Training-to-test ratio above which oracle containment is guaranteed.

    Equals 28*ln(2) * (1+eta) / (alpha * eta^2).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    return 28.0 * _LN2 * (1.0 + eta) / (alpha * eta * eta)


def gamma_lower_star(alpha: float, eta: float) -> float:
    """Ratio below which no procedure can mimic the oracle.

    Equals (1 + (alpha*(1-eta))^(-1/2))^(-3) / 64, valid for alpha < 1/4.
    """
    if not 0.0 < alpha < 0.25:
        raise ValueError(f"alpha must be in (0, 1/4), got {alpha}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    return (1.0 + (alpha * (1.0 - eta)) ** -0.5) ** -3 / 64.0


def power_guarantee_prob(gamma: float, alpha: float, eta: float) -> float:
    """Guaranteed probability that ss_bh contains the relaxed oracle.

    max(0, 1 - 2^(1 - 3*gamma/gamma_star)); the bound is silent (clipped to
    0) for gamma <= gamma_star/3, reaches 3/4 at gamma = gamma_star and
    tends to 1 as gamma grows.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    exponent = 1.0 - 3.0 * gamma / gamma_star(alpha, eta)
    return max(0.0, 1.0 - 2.0 ** exponent)


def rule_of_thumb_n(m: int, alpha: float, k: int) -> float:
    """NTS size at which the power transition occurs: m / (alpha*max(1,k))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if k < 0:
        raise ValueError("k must be >= 0")
    return m / (alpha * max(1, k))


@dataclass(frozen=True)
class PhasePoint:
    """One classified point of the (m, n) plane."""

    n: float
    m: int
    alpha: float
    k: int
    region: str


def classify_phase(n, m: int, alpha, k: int = 0) -> PhasePoint:
    """Classify (n, m) against the constant-1 transition lines.

    MimicPossibleGeneral when n >= m/alpha (boundary inclusive, a documented
    convention); otherwise MimicPossibleFavorable when at least k >= 1
    detectable alternatives are assumed and n >= m/(alpha*k); otherwise
    MimicImpossibleGeneral. Comparisons use alpha as an exact fraction so
    points sitting on a boundary classify deterministically.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    if k < 0:
        raise ValueError("k must be >= 0")
    frac = alpha_as_fraction(alpha)
    a, b = frac.numerator, frac.denominator
    n_exact = Fraction(float(n)).limit_denominator(10**9)
    # n >= m/alpha  <=>  n*a >= m*b, exact when n is integral.
    if n_exact * a >= m * b:
        region = MIMIC_POSSIBLE_GENERAL
    elif k >= 1 and n_exact * a * k >= m * b:
        region = MIMIC_POSSIBLE_FAVORABLE
    else:
        region = MIMIC_IMPOSSIBLE_GENERAL
    return PhasePoint(n=float(n), m=int(m), alpha=float(frac), k=int(k),
                      region=region)


def phase_diagram(m_grid, alpha, k_values) -> list[PhasePoint]:
    """Boundary table for the phase diagram, one row per (m, k).

    Each row sits on the general transition line n = m/alpha (classified by
    classify_phase, hence MimicPossibleGeneral under the inclusive
    convention) and carries the k-refined line m/(alpha*max(1,k)) in
    ``rule_of_thumb_n`` via :func:`phase_rows`; plots draw both lines from
    the emitted columns.
    """
    m_grid = list(m_grid)
    k_values = list(k_values)
    if not m_grid or not k_values:
        raise ValueError("m_grid and k_values must be nonempty")
    frac = alpha_as_fraction(alpha)
    points = []
    for m in m_grid:
        n_general = m / float(frac)
        for k in k_values:
            points.append(classify_phase(n_general, m, frac, k))
    return points


def phase_rows(points: list[PhasePoint]) -> list[dict]:
    """CSV-ready rows (n, m, alpha, k, region, rule_of_thumb_n)."""
    return [
        {
            "n": pt.n,
            "m": pt.m,
            "alpha": pt.alpha,
            "k": pt.k,
            "region": pt.region,
            "rule_of_thumb_n": rule_of_thumb_n(pt.m, pt.alpha, pt.k),
        }
        for pt in points
    ]
