"""Executes simulation cells and presets into CSV-ready rows and files."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .dataio import write_csv
from .datagen import ScenarioSpec
from .evaluation import monte_carlo
from .presets import (PHASE_ALPHA, PHASE_K_VALUES, PHASE_M_GRID, STAR_POINT,
                      Panel, build_panels)
from .theory import (classify_phase, fdr_bounds, phase_diagram, phase_rows,
                     rule_of_thumb_n)

SUMMARY_FIELDS = ["procedure", "fdr_hat", "se_fdr", "sd_fdp",
                  "tdr_hat", "se_tdr", "sd_tdp", "reps"]
CELL_KEY_FIELDS = ["n", "m", "m1", "effect", "family", "alpha"]
BOUND_FIELDS = ["fdr_lower", "fdr_upper"]
PANEL_FIELDS = CELL_KEY_FIELDS + SUMMARY_FIELDS + BOUND_FIELDS
OUTCOME_FIELDS = ["replicate", "procedure", "fdp", "tdp", "rejections",
                  "contained", "oracle_tdp"]
PHASE_FIELDS = ["n", "m", "alpha", "k", "region", "rule_of_thumb_n"]


def summary_rows(result) -> list[dict]:
    """Rows in the summary-CSV schema for one Monte-Carlo run."""
    return [{
        "procedure": s.procedure,
        "fdr_hat": s.fdr_hat, "se_fdr": s.se_fdr, "sd_fdp": s.sd_fdp,
        "tdr_hat": s.tdr_hat, "se_tdr": s.se_tdr, "sd_tdp": s.sd_tdp,
        "reps": s.reps,
    } for s in result.summaries]


def outcome_rows(result) -> list[dict]:
    return [{
        "replicate": o.replicate, "procedure": o.procedure,
        "fdp": o.fdp, "tdp": o.tdp, "rejections": o.rejections,
        "contained": o.contained, "oracle_tdp": o.oracle_tdp,
    } for o in result.outcomes()]


def run_cell(spec: ScenarioSpec, procedures, reps: int, eta: float = 0.0,
             threads: int = 1) -> list[dict]:
    """One simulation cell -> panel-schema rows (keys + summary + bounds)."""
    result = monte_carlo(spec, procedures=procedures, reps=reps, eta=eta,
                         threads=threads)
    if spec.n >= 1:
        bounds = fdr_bounds(spec.alpha, spec.n, spec.m, spec.m0)
        lower, upper = bounds.lower, bounds.upper
    else:
        lower = upper = ""  # sandwich undefined without an NTS
    rows = []
    for srow in summary_rows(result):
        rows.append({
            "n": spec.n, "m": spec.m, "m1": spec.m1, "effect": spec.effect,
            "family": spec.family, "alpha": spec.alpha,
            **srow, "fdr_lower": lower, "fdr_upper": upper,
        })
    return rows


def run_panel(panel: Panel, eta: float = 0.0, threads: int = 1) -> list[dict]:
    rows = []
    for cell in panel.cells:
        rows.extend(run_cell(cell.spec, cell.procedures, cell.reps, eta=eta,
                             threads=threads))
    return rows


def run_sweep(base_spec: ScenarioSpec, n_values, procedures, reps: int,
              eta: float = 0.0, threads: int = 1,
              seed_by_cell: bool = True) -> list[dict]:
    """Vary the NTS size over a grid, one Monte-Carlo run per value.

    Each cell reseeds from (base seed, cell index) so cells stay independent
    of grid order.
    """
    import numpy as np

    rows = []
    for idx, n in enumerate(n_values):
        if seed_by_cell:
            seed = int(np.random.SeedSequence(
                base_spec.seed, spawn_key=(idx,)).generate_state(
                    1, dtype=np.uint64)[0])
        else:
            seed = base_spec.seed
        spec = replace(base_spec, n=int(n), seed=seed)
        procs = tuple(p for p in procedures if p == "oracle") if n == 0 \
            else tuple(procedures)
        if not procs:
            continue
        rows.extend(run_cell(spec, procs, reps, eta=eta, threads=threads))
    return rows


def phase_table_rows(alpha=PHASE_ALPHA, m_grid=PHASE_M_GRID,
                     k_values=PHASE_K_VALUES, star=STAR_POINT) -> list[dict]:
    """Boundary rows for the phase diagram plus the application-scale point."""
    rows = phase_rows(phase_diagram(m_grid, alpha, k_values))
    if star is not None:
        pt = classify_phase(star["n"], star["m"], alpha, star["k"])
        rows.append({
            "n": pt.n, "m": pt.m, "alpha": pt.alpha, "k": pt.k,
            "region": pt.region,
            "rule_of_thumb_n": rule_of_thumb_n(pt.m, pt.alpha, pt.k),
        })
    return rows


def run_preset(preset_id: str, out_dir, budget: float = 1.0,
               reps_override: int | None = None, master_seed=None,
               eta: float = 0.0, threads: int = 1,
               write_figures: bool = True, emit_svg: bool = False) -> dict:
    """Run one figure preset into ``out_dir``: one CSV (+ figure) per panel.

    Returns {"panels": {name: rows}, "csv_paths": {name: path}}.
    """
    from .presets import DEFAULT_SEED

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = DEFAULT_SEED if master_seed is None else int(master_seed)
    result = {"panels": {}, "csv_paths": {}}

    if preset_id == "fig1":
        rows = phase_table_rows()
        path = out_dir / "fig1_phase.csv"
        write_csv(path, PHASE_FIELDS, rows)
        result["panels"]["fig1_phase"] = rows
        result["csv_paths"]["fig1_phase"] = path
        if write_figures:
            from .figures import render_phase_csv
            render_phase_csv(path, out_dir / "fig1_phase", emit_svg=emit_svg)
        return result

    for panel in build_panels(preset_id, budget=budget,
                              reps_override=reps_override, master_seed=seed):
        rows = run_panel(panel, eta=eta, threads=threads)
        path = out_dir / f"{panel.name}.csv"
        write_csv(path, PANEL_FIELDS, rows)
        result["panels"][panel.name] = rows
        result["csv_paths"][panel.name] = path
        if write_figures:
            from .figures import render_panel_csv
            render_panel_csv(path, out_dir / panel.name, emit_svg=emit_svg)
    return result
