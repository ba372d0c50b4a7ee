"""Experiment configuration: JSON schema parsing, validation, field building.

Schema (all keys except "field" optional):

    {
      "family": "exponential" | "geometric",
      "field": {"preset": name, "params": {...}}
               | {"piecewise": [{"region": {...}, "mu": real}, ...],
                  "default_mu": real},
      "boundary_source": {"constant": real}
                         | {"segments": [{"axis": "horizontal"|"vertical",
                                          "from": real, "to": real,
                                          "mu_s": real}, ...]},
      "line_sources": [{"axis": ..., "offset": real, "strength": real}, ...],
      "h": real, "extent": [real, real], "N": int, "trials": int,
      "seed": int, "levels": [real, ...], "times": [real, ...],
      "x0": [[real, real], ...], "eps": real, "s_step": real,
      "r": real, "z": [real, real], "out": str
    }

Regions for piecewise fields: {"type": "rect", "x": [a, b], "y": [c, d]},
{"type": "disk", "center": [cx, cy], "radius_sq": real}, or
{"type": "halfplane", "normal": [n1, n2], "offset": real} (n.x >= offset).
The first matching region wins; bounds are inclusive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .weight_field import DistributionFamily, LineSource, WeightField, preset

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "build_field"]


class ConfigError(ValueError):
    """Raised for schema violations; carries a machine-readable payload."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.payload = {"error": "config", "message": message, "key": key}


@dataclass
class ExperimentConfig:
    raw: dict
    family: DistributionFamily
    field: WeightField
    h: float = 1.0 / 500
    extent: tuple = (1.0, 1.0)
    N: int = 1000
    trials: int = 5
    seed: int = 1
    levels: list | None = None
    times: list = dc_field(default_factory=list)
    x0: list = dc_field(default_factory=lambda: [(1.0, 1.0)])
    eps: float = 0.01
    s_step: float = 0.01
    r: float = 0.5
    z: tuple | None = None
    h_list: list | None = None
    out: str = "."


def _require(cond: bool, message: str, key: str | None = None):
    if not cond:
        raise ConfigError(message, key)


def _region_predicate(region: dict):
    kind = region.get("type")
    if kind == "rect":
        (a, b), (c, d) = region["x"], region["y"]
        return lambda x1, x2: (x1 >= a) & (x1 <= b) & (x2 >= c) & (x2 <= d)
    if kind == "disk":
        cx, cy = region["center"]
        r2 = region["radius_sq"]
        return lambda x1, x2: (x1 - cx) ** 2 + (x2 - cy) ** 2 <= r2
    if kind == "halfplane":
        n1, n2 = region["normal"]
        off = region["offset"]
        return lambda x1, x2: n1 * x1 + n2 * x2 >= off
    raise ConfigError(f"unknown region type {kind!r}", "field.piecewise.region")


def _piecewise_evaluator(pieces: list, default_mu: float):
    preds = [(_region_predicate(p["region"]), float(p["mu"])) for p in pieces]

    def f(x1, x2):
        out = np.full(np.broadcast(x1, x2).shape, float(default_mu))
        assigned = np.zeros(out.shape, dtype=bool)
        for pred, mu in preds:
            mask = pred(np.asarray(x1), np.asarray(x2)) & ~assigned
            out = np.where(mask, mu, out)
            assigned = assigned | mask
        return out

    return f


def _boundary_evaluator(spec: dict):
    if "constant" in spec:
        c = float(spec["constant"])
        _require(c >= 0, "boundary source must be nonnegative", "boundary_source.constant")
        return lambda x1, x2: np.full(np.broadcast(x1, x2).shape, c)
    segments = spec.get("segments", [])

    def f(x1, x2):
        a1 = np.asarray(x1, float)
        a2 = np.asarray(x2, float)
        out = np.zeros(np.broadcast(a1, a2).shape)
        for seg in segments:
            lo, hi = float(seg["from"]), float(seg["to"])
            v = float(seg["mu_s"])
            if seg["axis"] == "horizontal":
                out = out + v * ((a2 == 0) & (a1 >= lo) & (a1 <= hi))
            else:
                out = out + v * ((a1 == 0) & (a2 >= lo) & (a2 <= hi))
        return out

    return f


def build_field(raw: dict) -> WeightField:
    """Construct the weight field described by the config dict."""
    _require("field" in raw, "missing required key 'field'", "field")
    spec = raw["field"]
    family_name = raw.get("family", "exponential")
    try:
        family = DistributionFamily(family_name)
    except ValueError:
        raise ConfigError(f"unknown family {family_name!r}", "family") from None

    line_sources = tuple(
        LineSource(s["axis"], float(s["offset"]), float(s["strength"]))
        for s in raw.get("line_sources", [])
    )

    if "preset" in spec:
        base = preset(spec["preset"], **spec.get("params", {}))
        boundary = base.boundary_source
        if "boundary_source" in raw:
            boundary = _boundary_evaluator(raw["boundary_source"])
        return WeightField(
            family=family if "family" in raw else base.family,
            bulk_mean=base.bulk_mean,
            boundary_source=boundary,
            line_sources=base.line_sources + line_sources,
            description=base.description,
        )
    if "piecewise" in spec:
        bulk = _piecewise_evaluator(spec["piecewise"], spec.get("default_mu", 0.0))
        boundary = _boundary_evaluator(raw.get("boundary_source", {}))
        return WeightField(family, bulk, boundary, line_sources, description="piecewise")
    raise ConfigError("field must specify 'preset' or 'piecewise'", "field")


def load_config(path, seed_override=None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}") from None
    field = build_field(raw)
    cfg = ExperimentConfig(raw=raw, family=field.family, field=field)
    if "h" in raw:
        cfg.h = float(raw["h"])
        _require(cfg.h > 0, "h must be positive", "h")
    if "extent" in raw:
        cfg.extent = tuple(float(v) for v in raw["extent"])
        _require(len(cfg.extent) == 2 and min(cfg.extent) > 0, "extent must be two positives", "extent")
    if "N" in raw:
        cfg.N = int(raw["N"])
        _require(cfg.N >= 1, "N must be >= 1", "N")
    if "trials" in raw:
        cfg.trials = int(raw["trials"])
        _require(cfg.trials >= 1, "trials must be >= 1", "trials")
    if seed_override is not None:
        cfg.seed = int(seed_override)
    elif "seed" in raw:
        cfg.seed = int(raw["seed"])
    if "levels" in raw:
        cfg.levels = [float(v) for v in raw["levels"]]
    if "times" in raw:
        cfg.times = [float(v) for v in raw["times"]]
    if "x0" in raw:
        cfg.x0 = [tuple(float(v) for v in p) for p in raw["x0"]]
    if "eps" in raw:
        cfg.eps = float(raw["eps"])
    if "s_step" in raw:
        cfg.s_step = float(raw["s_step"])
    if "r" in raw:
        cfg.r = float(raw["r"])
        _require(0 < cfg.r <= 1, "r must lie in (0, 1]", "r")
    if "z" in raw:
        cfg.z = tuple(float(v) for v in raw["z"])
    if "h_list" in raw:
        cfg.h_list = [float(v) for v in raw["h_list"]]
    if "out" in raw:
        cfg.out = str(raw["out"])
    return cfg
