"""File formats: value lists, deterministic CSVs, run manifests.

CSV cells are formatted with repr() for floats (shortest round-trip form),
so a rerun with the same seeds produces byte-identical files regardless of
worker count.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import DataError, UsageError


def read_values(path) -> np.ndarray:
    """One real per line, UTF-8; '#' comment lines and blanks skipped.

    A single leading non-numeric line is tolerated as a header; any later
    parse failure raises DataError with its line number. An empty file is a
    UsageError (nothing to test is a caller mistake, not bad data).
    """
    values = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                if not values and not header_seen:
                    header_seen = True
                    continue
                raise DataError(f"{path}: line {lineno}: not a number: {line!r}")
    if not values:
        raise UsageError(f"{path}: no numeric values found")
    return np.asarray(values, dtype=float)


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, fieldnames: list[str], rows) -> None:
    """Write dict rows with '\n' line endings and deterministic formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row[name]) for name in fieldnames])


def write_manifest(out_dir, config: dict) -> Path:
    """Echo the resolved run configuration next to its outputs."""
    from . import __version__

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = dict(config)
    payload["ssmt_version"] = __version__
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def ensure_fresh_dir(out_dir, force: bool) -> Path:
    """Refuse to overwrite a previous run unless forced."""
    out_dir = Path(out_dir)
    if (out_dir / "manifest.json").exists() and not force:
        raise FileExistsError(
            f"{out_dir} already holds a run (manifest.json present); "
            "pass --force to overwrite")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def relative_to_cwd(path) -> str:
    try:
        return os.path.relpath(path)
    except ValueError:
        return str(path)
