"""Small JSON/CSV helpers shared by the coverage harness and the CLI."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def jsonify(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats -> None."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: str | Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonify(obj), fh, indent=2)
        fh.write("\n")


def fmt(x) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(x))


def write_csv(path: str | Path, header: list[str], rows, comments: list[str] = ()) -> None:
    """Write rows of already-formatted strings with a schema comment line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
