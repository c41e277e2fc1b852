"""Deterministic CSV/JSON writers shared by all CLI subcommands.

Data sections are byte-identical for identical parameters and seed: floats
are printed with 12 significant digits, metadata carries no timestamps.
"""

from __future__ import annotations

import json

ARTIFACT_VERSION = "0.1.0"


def format_value(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def write_csv(path: str, meta: dict, columns: list, rows) -> None:
    """CSV with '#'-prefixed metadata lines and a header row."""
    lines = [f"# artifact_version: {ARTIFACT_VERSION}"]
    for k, v in meta.items():
        lines.append(f"# {k}: {format_value(v)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(float(x)) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(path: str, meta: dict, payload: dict) -> None:
    doc = {"meta": {"artifact_version": ARTIFACT_VERSION, **meta}}
    doc.update(_round_floats(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_csv(path: str):
    """Parse a CSV written by write_csv: returns (meta, columns, rows)."""
    meta = {}
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    meta[k.strip()] = v.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    if columns is None:
        raise ValueError(f"{path}: no header row found")
    return meta, columns, rows
