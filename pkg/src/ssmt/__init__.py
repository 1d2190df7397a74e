"""Semi-supervised multiple testing.

FDR-controlling BH procedures calibrated from a null training sample,
their theoretical FDR/power bounds, and a seeded Monte-Carlo harness for
power studies and figure reproduction.
"""

__version__ = "0.1.0"

from .datagen import (Dataset, ScenarioSpec, gen_gaussian_iid,
                      gen_gaussian_neg_equicorr, gen_lrt_two_group,
                      gen_student_iid, generate, lrt_null_sampler,
                      lrt_oracle_tail, null_model_for, replicate_rng)
from .errors import DataError, NumericalError, UsageError
from .evaluation import (MetricsSummary, MonteCarloResult, ReplicateOutcome,
                         containment_frequency, detectability_k, fdp,
                         monte_carlo, tdp, tdp_dominance_frequency)
from .procedures import (RejectionSet, SsBhDiagnostics, bh_stepup, blackbox_bh,
                         blackbox_n, by_procedure, equicorrelated_extend,
                         harmonic_number, locfdr_oracle, randomized_bh,
                         randomized_n, split_bh, ss_bh)
from .pvalues import (NullModel, PValues, conservative_empirical_pvalues,
                      empirical_upper_tail, naive_empirical_pvalues,
                      oracle_pvalues)
from .theory import (FdrBounds, PhasePoint, classify_phase, fdr_bounds,
                     gamma_lower_star, gamma_star, phase_diagram,
                     power_guarantee_prob, rule_of_thumb_n)

__all__ = [
    "__version__",
    "DataError", "NumericalError", "UsageError",
    "NullModel", "PValues", "oracle_pvalues", "naive_empirical_pvalues",
    "conservative_empirical_pvalues", "empirical_upper_tail",
    "RejectionSet", "SsBhDiagnostics", "bh_stepup", "ss_bh", "by_procedure",
    "split_bh", "blackbox_n", "blackbox_bh", "equicorrelated_extend",
    "randomized_n", "randomized_bh", "locfdr_oracle", "harmonic_number",
    "FdrBounds", "fdr_bounds", "gamma_star", "gamma_lower_star",
    "power_guarantee_prob", "rule_of_thumb_n", "PhasePoint", "classify_phase",
    "phase_diagram",
    "ScenarioSpec", "Dataset", "generate", "gen_gaussian_iid",
    "gen_gaussian_neg_equicorr", "gen_student_iid", "gen_lrt_two_group",
    "lrt_null_sampler", "lrt_oracle_tail", "null_model_for", "replicate_rng",
    "fdp", "tdp", "monte_carlo", "MonteCarloResult", "MetricsSummary",
    "ReplicateOutcome", "containment_frequency", "tdp_dominance_frequency",
    "detectability_k",
]
