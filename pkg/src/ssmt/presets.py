"""Frozen parameter grids reproducing the study's figures.

Each preset is a list of panels; each panel is a list of cells (one
Monte-Carlo run per NTS size n). Replicate counts are the published ones
and scale by a budget factor, since the largest grids (10^6 replicates)
exceed desk budgets. The n grids for the power panels are log-ish spreads
covering the predicted transitions (the sources plot curves without listing
grid points); the sparse m=10 grid includes n = 5 and n = 40 because the
acceptance checks compare the oracle gap at exactly those sizes.

At n = 0 the NTS procedures are undefined, so those columns carry
oracle-only results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import GAUSSIAN_IID, GAUSSIAN_NEG_EQUICORR, ScenarioSpec

PRESET_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")

DEFAULT_SEED = 20260810

# fig1 constants
PHASE_ALPHA = 0.2
PHASE_K_VALUES = (3, 100)
PHASE_M_GRID = tuple(int(v) for v in np.unique(np.round(
    np.logspace(0, 7, 36)).astype(int)))
STAR_POINT = {"n": 2_300_000, "m": 3_300_000, "k": 100}


@dataclass(frozen=True)
class PanelCell:
    spec: ScenarioSpec
    reps: int
    procedures: tuple[str, ...]


@dataclass(frozen=True)
class Panel:
    name: str
    cells: tuple[PanelCell, ...]


def _cell_seed(master_seed: int, panel_index: int, cell_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(panel_index, cell_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _scale(reps: int, budget: float, reps_override: int | None) -> int:
    if reps_override is not None:
        return int(reps_override)
    return max(1, int(round(reps * budget)))


def _fdr_panel(name: str, panel_index: int, m: int, family: str, n_values,
               reps: int, procedures: tuple[str, ...], alpha: float,
               budget: float, reps_override, master_seed: int) -> Panel:
    cells = []
    for idx, n in enumerate(n_values):
        procs = ("oracle",) if n == 0 else procedures
        spec = ScenarioSpec(m=m, n=int(n), m1=0, family=family, alpha=alpha,
                            seed=_cell_seed(master_seed, panel_index, idx))
        cells.append(PanelCell(spec=spec, reps=_scale(reps, budget, reps_override),
                               procedures=procs))
    return Panel(name=name, cells=tuple(cells))


def _power_panel(name: str, panel_index: int, m: int, m1: int, mu: float,
                 n_values, reps_for, alpha: float, budget: float,
                 reps_override, master_seed: int) -> Panel:
    cells = []
    for idx, n in enumerate(n_values):
        spec = ScenarioSpec(m=m, n=int(n), m1=m1, family=GAUSSIAN_IID,
                            effect=mu, alpha=alpha,
                            seed=_cell_seed(master_seed, panel_index, idx))
        cells.append(PanelCell(spec=spec,
                               reps=_scale(reps_for(int(n)), budget, reps_override),
                               procedures=("ss_bh", "oracle")))
    return Panel(name=name, cells=tuple(cells))


def build_panels(preset_id: str, budget: float = 1.0,
                 reps_override: int | None = None,
                 master_seed: int = DEFAULT_SEED) -> list[Panel]:
    """Materialize the Monte-Carlo panels of a preset (empty for fig1)."""
    if preset_id not in PRESET_IDS:
        raise ValueError(f"unknown preset {preset_id!r}; choose from {PRESET_IDS}")
    if budget <= 0:
        raise ValueError(f"budget must be positive, got {budget}")

    if preset_id == "fig1":
        return []

    if preset_id == "fig2":
        return [_fdr_panel("fig2_negcorr_m2", 0, m=2,
                           family=GAUSSIAN_NEG_EQUICORR,
                           n_values=range(0, 21), reps=1_000_000,
                           procedures=("ss_bh", "oracle"), alpha=0.5,
                           budget=budget, reps_override=reps_override,
                           master_seed=master_seed)]

    if preset_id == "fig3":
        procedures = ("ss_bh", "oracle", "naive_bh")
        layout = [
            ("fig3_iid_m2", GAUSSIAN_IID, 2, range(0, 21), 100_000),
            ("fig3_negcorr_m2", GAUSSIAN_NEG_EQUICORR, 2, range(0, 21), 100_000),
            ("fig3_iid_m10", GAUSSIAN_IID, 10, range(0, 41), 10_000),
            ("fig3_negcorr_m10", GAUSSIAN_NEG_EQUICORR, 10, range(0, 41), 10_000),
        ]
        return [_fdr_panel(name, i, m=m, family=family, n_values=ns, reps=reps,
                           procedures=procedures, alpha=0.5, budget=budget,
                           reps_override=reps_override, master_seed=master_seed)
                for i, (name, family, m, ns, reps) in enumerate(layout)]

    if preset_id == "fig4":
        grids = {10: (1, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 30),
                 100: (1, 2, 3, 5, 7, 10, 14, 20, 30, 40, 60, 80, 100)}
        reps = {10: 10_000, 100: 1_000}
        panels = []
        for i, (m, mu) in enumerate([(10, 1.0), (10, 2.0), (100, 1.0), (100, 2.0)]):
            panels.append(_power_panel(
                f"fig4_dense_m{m}_mu{mu:g}", i, m=m, m1=m // 2, mu=mu,
                n_values=grids[m], reps_for=lambda n, r=reps[m]: r, alpha=0.5,
                budget=budget, reps_override=reps_override,
                master_seed=master_seed))
        return panels

    if preset_id == "fig5":
        grids = {10: (1, 2, 3, 5, 8, 12, 20, 30, 40, 60, 80),
                 100: (1, 2, 5, 10, 20, 40, 80, 120, 200, 300, 400)}
        reps = {10: 10_000, 100: 1_000}
        panels = []
        for i, (m, mu) in enumerate([(10, 1.0), (10, 3.0), (100, 1.0), (100, 3.0)]):
            panels.append(_power_panel(
                f"fig5_sparse_m{m}_mu{mu:g}", i, m=m, m1=1, mu=mu,
                n_values=grids[m], reps_for=lambda n, r=reps[m]: r, alpha=0.5,
                budget=budget, reps_override=reps_override,
                master_seed=master_seed))
        return panels

    if preset_id == "fig6":
        m = 1000
        mu_full = math.sqrt(2.0 * math.log(m))
        n_values = (1, 2, 5, 10, 20, 50, 100, 200, 500,
                    1000, 2000, 5000, 10_000, 20_000, 50_000)

        def reps_for(n: int) -> int:
            return 1000 if n < 1000 else 100

        panels = []
        for i, (m1, mu, tag) in enumerate([(500, 0.5 * mu_full, "dense"),
                                           (10, mu_full, "sparse")]):
            panels.append(_power_panel(
                f"fig6_{tag}_m1000", i, m=m, m1=m1, mu=mu, n_values=n_values,
                reps_for=reps_for, alpha=0.2, budget=budget,
                reps_override=reps_override, master_seed=master_seed))
        return panels

    raise AssertionError("unreachable")
