"""Command-line entry point.

    ssmt apply      --x stats.txt --y nts.txt --alpha 0.2 [--procedure ss_bh]
    ssmt simulate   --m 10 --n 50 --m1 5 --mu 2 --reps 10000 ...
    ssmt sweep      --n-grid 1:40 ... (one Monte-Carlo cell per NTS size)
    ssmt boundary   --m-grid 1,10,100 --k-values 3,100 --alpha 0.2
    ssmt reproduce  --preset fig2 --budget 0.01
    ssmt bench      --n 2300000 --m 3300000

Every command writes a manifest.json beside its outputs; `--config
manifest.json` reruns it (explicit flags still win), reproducing the CSVs
byte-identically for any --threads. Exit codes: 0 success, 1 usage,
2 data, 3 numerical.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import DataError, NumericalError, UsageError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

APPLY_PROCEDURES = ("ss_bh", "naive_bh", "by", "split")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we use 1
        raise UsageError(message)


def _parse_grid(text: str) -> list[int]:
    """Comma list ('1,2,5') and/or inclusive ranges ('0:20' or '0:20:2')."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            pieces = [int(p) for p in part.split(":")]
            if len(pieces) == 2:
                lo, hi, step = pieces[0], pieces[1], 1
            elif len(pieces) == 3:
                lo, hi, step = pieces
            else:
                raise UsageError(f"bad grid range: {part!r}")
            if step < 1 or hi < lo:
                raise UsageError(f"bad grid range: {part!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty grid: {text!r}")
    return out


def _parse_fraction(text: str) -> Fraction:
    try:
        num, den = text.split("/")
        frac = Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--alpha-frac expects a/b, got {text!r}")
    if not Fraction(0) < frac < Fraction(1):
        raise UsageError(f"--alpha-frac must be in (0, 1), got {text}")
    return frac


def _resolve_alpha(opts: dict):
    """Prefer an exact fraction when given; else the float level."""
    if opts.get("alpha_frac"):
        return _parse_fraction(str(opts["alpha_frac"]))
    return float(opts.get("alpha", 0.1))


def _add_common(sub, *names):
    flags = {
        "alpha": lambda: sub.add_argument("--alpha", type=float,
                                          help="target FDR level in (0,1)"),
        "alpha_frac": lambda: sub.add_argument(
            "--alpha-frac", dest="alpha_frac", metavar="A/B",
            help="exact rational level, e.g. 1/5 (overrides --alpha)"),
        "scenario": lambda: [
            sub.add_argument("--m", type=int, help="number of tests"),
            sub.add_argument("--n", type=int, help="NTS size"),
            sub.add_argument("--m1", type=int, help="number of alternatives"),
            sub.add_argument("--mu", type=float, help="alternative shift"),
            sub.add_argument("--family", help="GaussianIid | GaussianNegEquicorr"
                                              " | StudentIid | LrtTwoGroup"),
            sub.add_argument("--df", type=float, help="Student degrees of freedom"),
            sub.add_argument("--pi0", type=float, help="null fraction (LRT only)"),
            sub.add_argument("--rho", type=float,
                             help="equicorrelation (randomized procedure)"),
        ],
        "mc": lambda: [
            sub.add_argument("--reps", type=int, help="Monte-Carlo replicates"),
            sub.add_argument("--eta", type=float,
                             help="oracle level relaxation (default 0)"),
            sub.add_argument("--procedures",
                             help="comma list: ss_bh,oracle,naive_bh,by,split,locfdr"),
        ],
        "run": lambda: [
            sub.add_argument("--seed", type=int, help="master seed"),
            sub.add_argument("--threads", type=int,
                             help="worker processes (0 = auto)"),
            sub.add_argument("--out", help="output directory"),
            sub.add_argument("--emit-svg", dest="emit_svg", action="store_true",
                             help="also write SVG figures"),
            sub.add_argument("--force", action="store_true",
                             help="overwrite an existing run directory"),
            sub.add_argument("--config", help="JSON config/manifest to load"),
        ],
    }
    for name in names:
        flags[name]()


def build_parser() -> _Parser:
    parser = _Parser(prog="ssmt", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("apply", help="run a procedure on data files")
    p.add_argument("--x", help="test statistics, one value per line")
    p.add_argument("--y", help="null training sample, one value per line")
    p.add_argument("--procedure", choices=APPLY_PROCEDURES)
    _add_common(p, "alpha", "alpha_frac", "run")

    p = subs.add_parser("simulate", help="Monte-Carlo run of one scenario cell")
    _add_common(p, "alpha", "alpha_frac", "scenario", "mc", "run")
    p.add_argument("--save-replicates", dest="save_replicates",
                   action="store_true",
                   help="persist one outcome row per replicate")

    p = subs.add_parser("sweep", help="Monte-Carlo runs over a grid of NTS sizes")
    _add_common(p, "alpha", "alpha_frac", "scenario", "mc", "run")
    p.add_argument("--n-grid", dest="n_grid", help="e.g. 0:20 or 1,2,5,10")

    p = subs.add_parser("boundary", help="phase-transition table and diagram")
    _add_common(p, "alpha", "alpha_frac", "run")
    p.add_argument("--m-grid", dest="m_grid", help="test-count grid")
    p.add_argument("--k-values", dest="k_values", help="detectable counts")

    p = subs.add_parser("reproduce", help="rebuild a study figure from its preset")
    p.add_argument("--preset", choices=("fig1", "fig2", "fig3", "fig4",
                                        "fig5", "fig6"))
    p.add_argument("--budget", type=float,
                   help="replicate multiplier (default 1.0 = published counts)")
    _add_common(p, "run")

    p = subs.add_parser("bench", help="time the sort-and-scan path at scale")
    p.add_argument("--m", type=int, help="number of tests")
    p.add_argument("--n", type=int, help="NTS size")
    p.add_argument("--runs", type=int, help="timing passes (default 5)")
    _add_common(p, "alpha", "alpha_frac", "run")
    return parser


_DEFAULTS = {
    "alpha": 0.2, "alpha_frac": None, "m": 10, "n": 10, "m1": 0, "mu": 0.0,
    "family": "GaussianIid", "df": 3.0, "pi0": None, "rho": None,
    "reps": 1000, "eta": 0.0, "procedures": "ss_bh,oracle", "seed": 20260810,
    "threads": 1, "out": "ssmt-out", "emit_svg": False, "force": False,
    "budget": 1.0, "preset": None, "x": None, "y": None,
    "procedure": "ss_bh", "save_replicates": False, "n_grid": "0:20",
    "m_grid": None, "k_values": None, "runs": 5, "config": None,
}


def _merge_options(args: argparse.Namespace) -> dict:
    provided = {k: v for k, v in vars(args).items()
                if v is not None and v is not False}
    opts = dict(_DEFAULTS)
    config_path = provided.get("config")
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        loaded.pop("ssmt_version", None)
        if "command" in loaded and loaded["command"] != args.command:
            raise UsageError(
                f"config is for command {loaded['command']!r}, not {args.command!r}")
        loaded.pop("command", None)
        opts.update({k: v for k, v in loaded.items() if k in _DEFAULTS})
    opts.update(provided)
    opts["command"] = args.command
    return opts


def _manifest_payload(opts: dict, extra: dict | None = None) -> dict:
    payload = {k: v for k, v in opts.items() if k in _DEFAULTS or k == "command"}
    if isinstance(payload.get("alpha_frac"), Fraction):
        frac = payload["alpha_frac"]
        payload["alpha_frac"] = f"{frac.numerator}/{frac.denominator}"
    payload.pop("config", None)
    payload.pop("force", None)
    if extra:
        payload.update(extra)
    return payload


def _out_dir(opts: dict) -> Path:
    from .dataio import ensure_fresh_dir

    return ensure_fresh_dir(opts["out"], force=bool(opts.get("force")))


def _threads(opts: dict) -> int:
    t = int(opts.get("threads", 1))
    if t < 0:
        raise UsageError("--threads must be >= 0")
    return t


def cmd_apply(opts: dict) -> int:
    import numpy as np

    from .dataio import read_values, write_csv, write_manifest
    from .procedures import bh_stepup, by_procedure, split_bh, ss_bh
    from .pvalues import conservative_empirical_pvalues, naive_empirical_pvalues

    if not opts.get("x") or not opts.get("y"):
        raise UsageError("apply needs --x and --y files")
    alpha = float(_resolve_alpha(opts))
    procedure = opts["procedure"]
    x = read_values(opts["x"])
    y = read_values(opts["y"])

    diag_v = None
    if procedure == "ss_bh":
        rejections, diags = ss_bh(x, y, alpha)
        pvals = conservative_empirical_pvalues(x, y).values
        diag_v = diags.V
    elif procedure == "naive_bh":
        p = naive_empirical_pvalues(x, y)
        rejections = bh_stepup(p, alpha)
        pvals = p.values
    elif procedure == "by":
        rejections = by_procedure(x, y, alpha)
        pvals = conservative_empirical_pvalues(x, y).values
    elif procedure == "split":
        rejections = split_bh(x, y, alpha)
        block = y.size // x.size
        blocks = y[:x.size * block].reshape(x.size, block)
        pvals = (np.sum(blocks >= x[:, None], axis=1) + 1) / (block + 1)
    else:
        raise UsageError(f"unknown procedure {procedure!r}")

    out_dir = _out_dir(opts)
    write_csv(out_dir / "rejections.csv", ["index", "statistic", "p_hat"],
              [{"index": int(i) + 1, "statistic": x[i], "p_hat": pvals[i]}
               for i in rejections.indices])
    summary = {
        "procedure": procedure, "alpha": alpha, "m": x.size, "n": y.size,
        "K": rejections.k_hat, "V": diag_v if diag_v is not None else "",
        "threshold_p": rejections.threshold_p,
    }
    write_csv(out_dir / "apply_summary.csv", list(summary), [summary])
    write_manifest(out_dir, _manifest_payload(opts))
    print(f"{procedure}: K={rejections.k_hat}"
          + (f" V={diag_v}" if diag_v is not None else "")
          + f" threshold_p={rejections.threshold_p!r} -> {out_dir}")
    return EXIT_OK


def _spec_from_opts(opts: dict, n: int | None = None):
    from .datagen import ScenarioSpec

    alpha = _resolve_alpha(opts)
    return ScenarioSpec(
        m=int(opts["m"]), n=int(opts["n"] if n is None else n),
        m1=int(opts["m1"]), family=str(opts["family"]),
        effect=float(opts["mu"]), df=float(opts["df"]),
        pi0=None if opts["pi0"] is None else float(opts["pi0"]),
        alpha=float(alpha), seed=int(opts["seed"]))


def _procedure_list(opts: dict) -> tuple[str, ...]:
    from .evaluation import PROCEDURES

    names = tuple(p.strip() for p in str(opts["procedures"]).split(",") if p.strip())
    for name in names:
        if name not in PROCEDURES:
            raise UsageError(f"unknown procedure {name!r}; choose from {PROCEDURES}")
    if not names:
        raise UsageError("--procedures is empty")
    return names


def cmd_simulate(opts: dict) -> int:
    from .dataio import write_csv, write_manifest
    from .evaluation import monte_carlo
    from .runner import OUTCOME_FIELDS, SUMMARY_FIELDS, outcome_rows, summary_rows

    spec = _spec_from_opts(opts)
    procedures = _procedure_list(opts)
    result = monte_carlo(spec, procedures=procedures, reps=int(opts["reps"]),
                         eta=float(opts["eta"]), threads=_threads(opts))
    out_dir = _out_dir(opts)
    write_csv(out_dir / "summary.csv", SUMMARY_FIELDS, summary_rows(result))
    if opts.get("save_replicates"):
        write_csv(out_dir / "outcomes.csv", OUTCOME_FIELDS, outcome_rows(result))
    write_manifest(out_dir, _manifest_payload(opts))
    for s in result.summaries:
        print(f"{s.procedure}: FDR={s.fdr_hat:.4f} (se {s.se_fdr:.4f}) "
              f"TDR={s.tdr_hat:.4f} (se {s.se_tdr:.4f}) reps={s.reps}")
    print(f"wrote {out_dir}")
    return EXIT_OK


def cmd_sweep(opts: dict) -> int:
    from .dataio import write_csv, write_manifest
    from .figures import render_panel_csv
    from .runner import PANEL_FIELDS, run_sweep

    base = _spec_from_opts(opts, n=1)
    n_values = _parse_grid(str(opts["n_grid"]))
    rows = run_sweep(base, n_values, _procedure_list(opts),
                     reps=int(opts["reps"]), eta=float(opts["eta"]),
                     threads=_threads(opts))
    out_dir = _out_dir(opts)
    csv_path = out_dir / "sweep.csv"
    write_csv(csv_path, PANEL_FIELDS, rows)
    render_panel_csv(csv_path, out_dir / "sweep", emit_svg=bool(opts["emit_svg"]))
    write_manifest(out_dir, _manifest_payload(opts))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_boundary(opts: dict) -> int:
    from .dataio import write_csv, write_manifest
    from .figures import render_phase_csv
    from .presets import PHASE_K_VALUES, PHASE_M_GRID
    from .runner import PHASE_FIELDS, phase_table_rows

    alpha = _resolve_alpha(opts)
    m_grid = _parse_grid(opts["m_grid"]) if opts.get("m_grid") else PHASE_M_GRID
    k_values = (_parse_grid(opts["k_values"]) if opts.get("k_values")
                else PHASE_K_VALUES)
    rows = phase_table_rows(alpha=alpha, m_grid=m_grid, k_values=k_values,
                            star=None)
    out_dir = _out_dir(opts)
    csv_path = out_dir / "phase.csv"
    write_csv(csv_path, PHASE_FIELDS, rows)
    render_phase_csv(csv_path, out_dir / "phase", emit_svg=bool(opts["emit_svg"]))
    write_manifest(out_dir, _manifest_payload(opts))
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_reproduce(opts: dict) -> int:
    from .dataio import write_manifest
    from .runner import run_preset

    preset = opts.get("preset")
    if not preset:
        raise UsageError("reproduce needs --preset figN (or a --config manifest)")
    budget = float(opts["budget"])
    if budget <= 0:
        raise UsageError("--budget must be positive")
    out_dir = _out_dir(opts)
    result = run_preset(preset, out_dir, budget=budget,
                        master_seed=int(opts["seed"]), threads=_threads(opts),
                        emit_svg=bool(opts["emit_svg"]))
    write_manifest(out_dir, _manifest_payload(opts))
    for path in result["csv_paths"].values():
        print(f"wrote {path}")
    return EXIT_OK


def cmd_bench(opts: dict) -> int:
    from .bench import run_bench
    from .dataio import write_csv, write_manifest

    try:
        report = run_bench(n=int(opts["n"]), m=int(opts["m"]),
                           alpha=float(_resolve_alpha(opts)),
                           runs=int(opts["runs"]), seed=int(opts["seed"]))
    except MemoryError:
        raise NumericalError(
            f"allocation failed for n={opts['n']}, m={opts['m']}")
    out_dir = _out_dir(opts)
    write_csv(out_dir / "bench.csv", list(report), [report])
    write_manifest(out_dir, _manifest_payload(opts))
    print(f"conservative p-values: {report['pvalues_median_s'] * 1e3:.1f} ms "
          f"(peak {report['pvalues_peak_bytes'] / 1e6:.0f} MB)")
    print(f"semi-supervised BH:    {report['ss_bh_median_s'] * 1e3:.1f} ms "
          f"(peak {report['ss_bh_peak_bytes'] / 1e6:.0f} MB)")
    print(f"K={report['K']} V={report['V']}")
    return EXIT_OK


_COMMANDS = {
    "apply": cmd_apply,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "boundary": cmd_boundary,
    "reproduce": cmd_reproduce,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = _merge_options(args)
        return _COMMANDS[opts["command"]](opts)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileExistsError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
