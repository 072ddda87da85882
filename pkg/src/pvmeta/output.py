"""Deterministic artifact writers shared by the CLI verbs.

Every CSV starts with one ``#`` comment line naming the tool version, the
seed and a hash of the resolved configuration. JSON files carry the same
information under a ``_meta`` key since JSON has no comments.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

TOOL = "pvmeta"


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(config: dict) -> str:
    """First 16 hex digits of the SHA-256 of the canonical config JSON."""
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def header_comment(seed, config: dict) -> str:
    return f"{TOOL} {__version__} seed={seed} config={config_hash(config)}"


def meta(seed, config: dict) -> dict:
    return {"tool": TOOL, "version": __version__, "seed": seed, "config_hash": config_hash(config)}


def fmt(value) -> str:
    """Full-precision text for a cell: ``repr`` for floats so values round-trip exactly."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comment: str) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_json(path, payload: dict, seed, config: dict) -> Path:
    path = Path(path)
    doc = dict(payload)
    doc["_meta"] = meta(seed, config)
    path.write_text(canonical_json(doc))
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of an artifact CSV, skipping comment lines."""
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
