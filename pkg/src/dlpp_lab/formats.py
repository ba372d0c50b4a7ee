"""On-disk artifact formats: CSV grids, compact binary grids, NDJSON, metadata.

All writers are deterministic: identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"DLPP1"

__all__ = [
    "write_grid_csv",
    "write_grid_binary",
    "read_grid_binary",
    "write_path_ndjson",
    "write_curve_ndjson",
    "write_json",
    "write_meta_sidecar",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_grid_csv(path, values: np.ndarray, *, kind: str, scale_N=None, seed=None, h=None,
                   extra: dict | None = None) -> None:
    """Row-major CSV with a comment header carrying dims and provenance."""
    parts = [f"dims={values.shape[0]}x{values.shape[1]}", f"kind={kind}"]
    if scale_N is not None:
        parts.append(f"N={scale_N}")
    if h is not None:
        parts.append(f"h={_fmt(h)}")
    if seed is not None:
        parts.append(f"seed={seed}")
    for k, v in (extra or {}).items():
        parts.append(f"{k}={v}")
    lines = ["# " + ", ".join(parts)]
    for row in values:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_grid_binary(path, values: np.ndarray) -> None:
    """Magic "DLPP1", little-endian uint32 dims, then float64 values."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", values.shape[0], values.shape[1]))
        f.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_grid_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:5] != MAGIC:
        raise ValueError(f"{path}: bad magic, not a DLPP1 grid")
    rows, cols = struct.unpack("<II", raw[5:13])
    return np.frombuffer(raw[13:], dtype="<f8").reshape(rows, cols).copy()


def write_path_ndjson(path, points) -> None:
    """Lattice path, one {"i": .., "j": ..} per line, origin first."""
    lines = [json.dumps({"i": int(i), "j": int(j)}) for i, j in points]
    Path(path).write_text("\n".join(lines) + "\n")


def write_curve_ndjson(path, points) -> None:
    """Continuum curve, one {"x": .., "y": ..} per line, origin first."""
    lines = [json.dumps({"x": float(x), "y": float(y)}) for x, y in points]
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def write_meta_sidecar(artifact_path, config: dict, seeds, notes: dict | None = None) -> None:
    """<artifact>.meta.json with config hash, seeds, and package versions."""
    from . import __version__

    meta = {
        "config_hash": config_hash(config),
        "config": config,
        "seeds": [int(s) for s in np.atleast_1d(seeds)] if seeds is not None else None,
        "versions": {"dlpp_lab": __version__, "numpy": np.__version__},
    }
    if notes:
        meta.update(notes)
    write_json(str(artifact_path) + ".meta.json", meta)
