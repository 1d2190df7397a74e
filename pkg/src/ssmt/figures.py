"""Figure rendering. Every plot is a pure function of a written CSV.

PNG is always produced; SVG additionally when asked. Date metadata is
stripped so reruns stay byte-comparable.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_COLORS = {"oracle": "tab:green", "ss_bh": "tab:blue", "naive_bh": "tab:red",
           "by": "tab:purple", "split": "tab:orange", "locfdr": "tab:brown"}
_LABELS = {"oracle": "oracle BH", "ss_bh": "semi-supervised BH",
           "naive_bh": "naive empirical BH", "by": "harmonic-corrected BH",
           "split": "split-NTS BH", "locfdr": "oracle local-fdr"}


def _read_rows(csv_path) -> list[dict]:
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _save(fig, out_base, emit_svg: bool) -> list[Path]:
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    paths = [out_base.with_suffix(".png")]
    fig.savefig(paths[0], dpi=150, metadata={"Software": None})
    if emit_svg:
        svg = out_base.with_suffix(".svg")
        fig.savefig(svg, metadata={"Date": None})
        paths.append(svg)
    plt.close(fig)
    return paths


def _float(value: str):
    return float(value) if value not in ("", None) else None


def render_panel_csv(csv_path, out_base, emit_svg: bool = False) -> list[Path]:
    """FDR (and TDR when present) against the NTS size, per procedure.

    Shaded bands show the replicate-level sd scaled by 1/10, matching the
    published error-bar convention; vertical bars show 2 standard errors of
    the estimates. The theoretical FDR sandwich is overlaid when the CSV
    carries it.
    """
    rows = _read_rows(csv_path)
    by_proc = defaultdict(list)
    for row in rows:
        by_proc[row["procedure"]].append(row)

    has_power = any(float(r["tdr_hat"]) > 0 for r in rows if r["tdr_hat"] != "")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    alpha_level = float(rows[0]["alpha"]) if rows else None

    for proc, prows in by_proc.items():
        prows = sorted(prows, key=lambda r: float(r["n"]))
        n = [float(r["n"]) for r in prows]
        fdr = [float(r["fdr_hat"]) for r in prows]
        se = [float(r["se_fdr"]) for r in prows]
        sd = [float(r["sd_fdp"]) for r in prows]
        color = _COLORS.get(proc, "black")
        label = _LABELS.get(proc, proc)
        ax.errorbar(n, fdr, yerr=[2 * s for s in se], color=color,
                    label=f"{label} FDR", lw=1.5, capsize=2)
        ax.fill_between(n, [f - s / 10 for f, s in zip(fdr, sd)],
                        [f + s / 10 for f, s in zip(fdr, sd)],
                        color=color, alpha=0.2, lw=0)
        if has_power:
            tdr = [float(r["tdr_hat"]) for r in prows]
            se_t = [float(r["se_tdr"]) for r in prows]
            ax.errorbar(n, tdr, yerr=[2 * s for s in se_t], color=color,
                        ls="--", lw=1.2, capsize=2, label=f"{label} TDR")

    bound_rows = sorted((r for r in rows if r["procedure"] == "ss_bh"
                         and r.get("fdr_lower") not in ("", None)),
                        key=lambda r: float(r["n"]))
    if bound_rows:
        n = [float(r["n"]) for r in bound_rows]
        ax.plot(n, [float(r["fdr_lower"]) for r in bound_rows], color="black",
                lw=1.0, label="FDR lower bound")
    if alpha_level is not None:
        ax.axhline(alpha_level, color="gray", ls=":", lw=1.0)

    ax.set_xlabel("NTS size n")
    ax.set_ylabel("rate")
    ax.set_title(Path(csv_path).stem)
    if max((float(r["n"]) for r in rows), default=0) > 200:
        ax.set_xscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, out_base, emit_svg)


def render_phase_csv(csv_path, out_base, emit_svg: bool = False) -> list[Path]:
    """Two-panel transition diagram: linear and log-log boundary lines.

    Draws, per detectable count k, the general line n = m/alpha and the
    refined line n = m/(alpha k); the log-log panel adds the dotted
    n = 1/alpha floor (the k = m limit) and any extra classified points as
    stars.
    """
    rows = _read_rows(csv_path)
    alpha = float(rows[0]["alpha"])
    ks = sorted({int(r["k"]) for r in rows})
    by_k = {k: sorted((r for r in rows if int(r["k"]) == k),
                      key=lambda r: int(r["m"])) for k in ks}
    # rows whose n is off the general line are classified extra points
    stars = [r for r in rows
             if abs(float(r["n"]) - float(r["m"]) / alpha) > 1e-6]

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, k, logscale in zip(axes, (ks[0], ks[-1]), (False, True)):
        prows = [r for r in by_k[k] if r not in stars]
        m = [float(r["m"]) for r in prows]
        general = [float(r["n"]) for r in prows]
        refined = [float(r["rule_of_thumb_n"]) for r in prows]
        ax.plot(m, general, color="black", lw=1.5,
                label=r"general transition n = m/$\alpha$")
        ax.plot(m, refined, color="tab:blue", lw=1.5,
                label=f"refined transition (k={k})")
        ax.fill_between(m, general, max(general), color="yellowgreen", alpha=0.3)
        ax.fill_between(m, refined, general, color="tomato", alpha=0.3)
        ax.fill_between(m, 0, refined, color="firebrick", alpha=0.3)
        if logscale:
            ax.axhline(1.0 / alpha, color="gray", ls=":", lw=1.2,
                       label=r"n = 1/$\alpha$ (k = m)")
            for r in stars:
                ax.plot(float(r["m"]), float(r["n"]), marker="*", ms=14,
                        color="goldenrod", ls="none",
                        label=f"classified point ({r['region']})")
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("number of tests m")
        ax.set_ylabel("NTS size n")
        ax.set_title(f"k = {k}" + (" (log-log)" if logscale else ""))
        ax.legend(fontsize=7, loc="upper left")
    fig.tight_layout()
    return _save(fig, out_base, emit_svg)
