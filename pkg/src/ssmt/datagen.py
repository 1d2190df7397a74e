"""Seeded scenario generators for the simulation studies.

A ScenarioSpec pins one simulation cell (sizes, family, effect, level,
seed); every generator is a pure function of (spec, replicate index).
Replicate r draws from the child stream

    numpy.random.default_rng(SeedSequence(spec.seed, spawn_key=(r,)))

so results do not depend on execution order or worker count. The
alternative indices are always the last m1 positions; the procedures are
permutation-equivariant in the labels, so the placement is immaterial (and
tested as such).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .errors import NumericalError
from .pvalues import NullModel

GAUSSIAN_IID = "GaussianIid"
GAUSSIAN_NEG_EQUICORR = "GaussianNegEquicorr"
STUDENT_IID = "StudentIid"
LRT_TWO_GROUP = "LrtTwoGroup"

FAMILIES = (GAUSSIAN_IID, GAUSSIAN_NEG_EQUICORR, STUDENT_IID, LRT_TWO_GROUP)

_FAMILY_ALIASES = {
    "gaussian_iid": GAUSSIAN_IID,
    "gaussian-iid": GAUSSIAN_IID,
    "gaussian_neg_equicorr": GAUSSIAN_NEG_EQUICORR,
    "gaussian-neg-equicorr": GAUSSIAN_NEG_EQUICORR,
    "student_iid": STUDENT_IID,
    "student-iid": STUDENT_IID,
    "lrt_two_group": LRT_TWO_GROUP,
    "lrt-two-group": LRT_TWO_GROUP,
}


def canonical_family(family: str) -> str:
    if family in FAMILIES:
        return family
    try:
        return _FAMILY_ALIASES[family.lower()]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


@dataclass(frozen=True)
class ScenarioSpec:
    """Full generative description of one simulation cell.

    ``effect`` is the location shift of the alternatives (for the LRT
    family, the alternative mean of the underlying measurements). ``df``
    applies to the Student family only (default 3; the exact study values
    are not pinned anywhere, so this is a configuration default). ``pi0``
    applies to the LRT family only and defaults to m0/m.
    """

    m: int
    n: int
    m1: int = 0
    family: str = GAUSSIAN_IID
    effect: float = 0.0
    df: float = 3.0
    pi0: float | None = None
    alpha: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0 <= self.m1 <= self.m:
            raise ValueError(f"m1 must be in [0, m], got {self.m1}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.df <= 0:
            raise ValueError("df must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.pi0 is not None and not 0.0 <= self.pi0 <= 1.0:
            raise ValueError(f"pi0 must be in [0, 1], got {self.pi0}")

    @property
    def m0(self) -> int:
        return self.m - self.m1

    @property
    def pi0_effective(self) -> float:
        return self.m0 / self.m if self.pi0 is None else self.pi0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class Dataset:
    """One realized sample: NTS y, test statistics x, true-null mask.

    ``h0_mask[i]`` is True when index i is a true null. ``t`` carries the
    raw measurements for the LRT family (None otherwise).
    """

    y: np.ndarray
    x: np.ndarray
    h0_mask: np.ndarray
    t: np.ndarray | None = field(default=None, compare=False)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Child random stream for one replicate of a master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def _h0_mask(m: int, m1: int) -> np.ndarray:
    mask = np.ones(m, dtype=bool)
    if m1:
        mask[m - m1:] = False
    return mask


def gen_gaussian_iid(spec: ScenarioSpec, replicate: int = 0) -> Dataset:
    """i.i.d. N(0,1) nulls and NTS; alternatives shifted to N(effect, 1)."""
    rng = replicate_rng(spec.seed, replicate)
    z = rng.standard_normal(spec.n + spec.m)
    y, x = z[:spec.n], z[spec.n:].copy()
    if spec.m1:
        x[spec.m - spec.m1:] += spec.effect
    return Dataset(y=y, x=x, h0_mask=_h0_mask(spec.m, spec.m1))


def gen_gaussian_neg_equicorr(spec: ScenarioSpec, replicate: int = 0,
                              allow_alternatives: bool = False) -> Dataset:
    """Maximally negatively equicorrelated Gaussian pooled sample.

    Draws W_1..W_{n+m} i.i.d. N(0,1) and sets
    Z = sqrt(1 + 1/(n+m-1)) * (W - mean(W)), giving unit variances and
    pairwise correlation -1/(n+m-1). Exchangeable, not independent. The
    study uses this family under the full null; adding alternatives (an
    independent shift on the last m1 coordinates) requires the explicit
    ``allow_alternatives`` opt-in because exchangeability of the pooled
    nulls must be re-examined by the caller.
    """
    if spec.m1 and not allow_alternatives:
        raise ValueError(
            "negative-equicorrelation family is defined under the full null; "
            "pass allow_alternatives=True to shift the last m1 coordinates")
    d = spec.n + spec.m
    if d < 2:
        raise ValueError("need n + m >= 2 for the equicorrelated construction")
    rng = replicate_rng(spec.seed, replicate)
    w = rng.standard_normal(d)
    z = math.sqrt(1.0 + 1.0 / (d - 1)) * (w - w.mean())
    y, x = z[:spec.n], z[spec.n:].copy()
    if spec.m1:
        x[spec.m - spec.m1:] += spec.effect
    return Dataset(y=y, x=x, h0_mask=_h0_mask(spec.m, spec.m1))


def gen_student_iid(spec: ScenarioSpec, replicate: int = 0) -> Dataset:
    """i.i.d. Student-t(df) nulls; alternatives location-shifted by effect."""
    rng = replicate_rng(spec.seed, replicate)
    z = rng.standard_t(spec.df, size=spec.n + spec.m)
    y, x = z[:spec.n], z[spec.n:].copy()
    if spec.m1:
        x[spec.m - spec.m1:] += spec.effect
    return Dataset(y=y, x=x, h0_mask=_h0_mask(spec.m, spec.m1))


def _gaussian_density_ratio(t: np.ndarray, mu: float) -> np.ndarray:
    """exp(mu*t - mu^2/2) in log space; overflow maps to the largest float.

    The +inf convention keeps the statistic ordered above every finite one.
    Underflow of both densities cannot occur on this pair (the log-ratio is
    always finite), so no resampling is ever needed here.
    """
    log_ratio = mu * t - 0.5 * mu * mu
    with np.errstate(over="ignore"):
        ratio = np.exp(log_ratio)
    big = np.finfo(float).max
    return np.where(np.isinf(ratio), big, ratio)


def gen_lrt_two_group(spec: ScenarioSpec,
                      replicate: int = 0) -> tuple[Dataset, np.ndarray]:
    """Likelihood-ratio statistics for the two-group Gaussian model.

    Measurements T_i follow N(0,1) under the null and N(effect,1) under the
    alternative; the tested statistic is the density ratio
    x_i = g1(T_i)/g0(T_i) = exp(effect*T_i - effect^2/2), strictly
    increasing in T_i. Returns the Dataset (whose y is the transformed NTS)
    together with the raw measurement vector for the test sample.
    """
    rng = replicate_rng(spec.seed, replicate)
    t_null = rng.standard_normal(spec.n + spec.m - spec.m1)
    t_alt = rng.standard_normal(spec.m1) + spec.effect
    t_y = t_null[:spec.n]
    t_x = np.concatenate([t_null[spec.n:], t_alt])
    y = _gaussian_density_ratio(t_y, spec.effect)
    x = _gaussian_density_ratio(t_x, spec.effect)
    return (Dataset(y=y, x=x, h0_mask=_h0_mask(spec.m, spec.m1), t=t_x), t_x)


def lrt_null_sampler(mu: float):
    """Blackbox null sampler for the likelihood-ratio statistic.

    Returns ``sampler(size, rng)`` drawing T ~ N(0,1) and emitting the
    density ratio, as needed by :func:`ssmt.procedures.blackbox_bh`.
    """

    def sampler(size: int, rng: np.random.Generator) -> np.ndarray:
        return _gaussian_density_ratio(rng.standard_normal(size), mu)

    return sampler


def lrt_gaussian_tail(t, mu: float):
    """Closed-form null upper tail of the Gaussian-pair density ratio."""
    return NullModel.lrt_gaussian(mu).upper_tail(t)


def lrt_oracle_tail(t: float, g0=None, g1=None, mu: float | None = None) -> float:
    """Null upper tail of a likelihood-ratio statistic, P(g1(T)/g0(T) >= t).

    With ``mu`` given, uses the closed-form monotone reduction for the
    built-in pair (N(0,1), N(mu,1)). Otherwise integrates
    g0(u) * 1{g1(u) > t*g0(u)} over the line by adaptive quadrature
    (absolute tolerance 1e-8), raising NumericalError if the estimate does
    not converge.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if mu is not None:
        return float(lrt_gaussian_tail(t, mu))
    if g0 is None or g1 is None:
        raise ValueError("provide densities g0 and g1, or mu for the built-in pair")

    def integrand(u):
        g0u = g0(u)
        return g0u if g1(u) > t * g0u else 0.0

    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(integrand, -np.inf, np.inf,
                                           epsabs=1e-8, limit=500)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"tail quadrature did not converge at t={t}: {exc}")
    if abserr > 1e-6:
        raise NumericalError(
            f"tail quadrature error estimate {abserr:.2e} too large at t={t}")
    return float(min(1.0, max(0.0, value)))


def generate(spec: ScenarioSpec, replicate: int = 0) -> Dataset:
    """Dispatch on the spec's family."""
    if spec.family == GAUSSIAN_IID:
        return gen_gaussian_iid(spec, replicate)
    if spec.family == GAUSSIAN_NEG_EQUICORR:
        return gen_gaussian_neg_equicorr(spec, replicate)
    if spec.family == STUDENT_IID:
        return gen_student_iid(spec, replicate)
    if spec.family == LRT_TWO_GROUP:
        return gen_lrt_two_group(spec, replicate)[0]
    raise ValueError(f"unknown family {spec.family!r}")


def null_model_for(spec: ScenarioSpec) -> NullModel:
    """The true null model of a scenario, for oracle procedures."""
    if spec.family in (GAUSSIAN_IID, GAUSSIAN_NEG_EQUICORR):
        return NullModel.gaussian()
    if spec.family == STUDENT_IID:
        return NullModel.student(spec.df)
    if spec.family == LRT_TWO_GROUP:
        return NullModel.lrt_gaussian(spec.effect)
    raise ValueError(f"unknown family {spec.family!r}")
