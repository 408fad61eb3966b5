"""CSV and JSON persistence with fixed numeric formatting."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SIG_DIGITS = 12


def fmt(x) -> str:
    """Format a real number with twelve significant digits."""
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


def write_csv(path, header: list[str], columns) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c) for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open() as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_sidecar(csv_path, meta: dict) -> Path:
    return write_json(sidecar_path(csv_path), meta)
