"""Macroscopic weight fields for inhomogeneous directed last passage percolation.

A weight field describes the site means of the random lattice weights through
a bulk mean mu(x) on [0,inf)^2, an extra boundary source mu_s supported on the
coordinate axes, and optional additive line sources snapped to single lattice
rows/columns/diagonals.  The variance is slaved to the mean per distribution
family: sigma = mu for exponentials, sigma = sqrt(mu(1+mu)) for geometrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _field
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "DistributionFamily",
    "LineSource",
    "WeightField",
    "sigma_from_mean",
    "geometric_nu",
    "preset",
    "PRESET_NAMES",
]


class DistributionFamily(Enum):
    EXPONENTIAL = "exponential"
    GEOMETRIC = "geometric"


def _as_float(x):
    a = np.asarray(x, dtype=float)
    return a


def sigma_from_mean(family: DistributionFamily, mu):
    """Standard deviation of an exponential/geometric weight with mean mu.

    Exponential: sigma = mu.  Geometric: sigma = sqrt(mu*(1+mu)).
    """
    a = _as_float(mu)
    if not np.all(np.isfinite(a)):
        raise ValueError("mean must be finite")
    if np.any(a < 0):
        raise ValueError("mean must be nonnegative")
    if family is DistributionFamily.EXPONENTIAL:
        out = a
    else:
        out = np.sqrt(a * (1.0 + a))
    return float(out) if np.ndim(mu) == 0 else out


def geometric_nu(mu):
    """Exponential-scale parameter nu with floor(nu * Exp(1)) geometric of mean mu.

    nu = 1 / (log(1+mu) - log(mu)) for mu > 0 and nu = 0 for mu = 0.
    """
    a = _as_float(mu)
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("mean must be nonnegative and finite")
    with np.errstate(divide="ignore"):
        nu = np.where(a > 0, 1.0 / np.log1p(1.0 / np.where(a > 0, a, 1.0)), 0.0)
    return float(nu) if np.ndim(mu) == 0 else nu


@dataclass(frozen=True)
class LineSource:
    """Additive mean bonus on a single lattice row, column, or diagonal.

    The continuum line (x2 = offset, x1 = offset, or x1 - x2 = offset) is
    snapped to the nearest lattice index round(offset * N) at scale N.
    """

    axis: str  # "horizontal" | "vertical" | "diagonal"
    offset: float
    strength: float

    def __post_init__(self):
        if self.axis not in ("horizontal", "vertical", "diagonal"):
            raise ValueError(f"unknown line source axis {self.axis!r}")
        if not (np.isfinite(self.strength) and self.strength >= 0):
            raise ValueError("line source strength must be nonnegative")

    def lattice_mask(self, i, j, scale):
        """Boolean mask of sites (i, j) on the snapped lattice trace at scale."""
        k = int(round(self.offset * scale))
        if self.axis == "horizontal":
            return np.asarray(j) == k
        if self.axis == "vertical":
            return np.asarray(i) == k
        return np.asarray(i) - np.asarray(j) == k

    def contains_point(self, x1, x2, tol=1e-12):
        """Exact continuum membership, used for curve-energy evaluation."""
        if self.axis == "horizontal":
            return abs(x2 - self.offset) <= tol
        if self.axis == "vertical":
            return abs(x1 - self.offset) <= tol
        return abs((x1 - x2) - self.offset) <= tol


def _zero_field(x1, x2):
    return np.zeros(np.broadcast(x1, x2).shape)


@dataclass(frozen=True)
class WeightField:
    """Macroscopic mean description shared by the simulator and the PDE solver.

    bulk_mean and boundary_source are vectorized callables (x1, x2) -> mean.
    boundary_source is only consulted on the axes; off-axis it is forced to 0.
    Immutable; evaluation is pure and safe to share across workers.
    """

    family: DistributionFamily
    bulk_mean: Callable
    boundary_source: Callable = _zero_field
    line_sources: tuple = ()
    description: str = "custom"

    def bulk_mean_at(self, x1, x2):
        v = np.asarray(self.bulk_mean(np.asarray(x1, float), np.asarray(x2, float)), float)
        if np.any(v < 0):
            raise ValueError(f"bulk mean negative in field {self.description!r}")
        return float(v) if np.ndim(x1) == 0 and np.ndim(x2) == 0 else v

    def boundary_source_at(self, x1, x2):
        """Boundary source, extended by zero on the open quadrant."""
        a1 = np.asarray(x1, float)
        a2 = np.asarray(x2, float)
        on_axis = (a1 == 0) | (a2 == 0)
        v = np.where(on_axis, np.asarray(self.boundary_source(a1, a2), float), 0.0)
        if np.any(v < 0):
            raise ValueError(f"boundary source negative in field {self.description!r}")
        return float(v) if np.ndim(x1) == 0 and np.ndim(x2) == 0 else v

    def _line_bonus(self, i, j, scale):
        b = np.zeros(np.broadcast(np.asarray(i), np.asarray(j)).shape)
        for src in self.line_sources:
            b = b + src.strength * src.lattice_mask(i, j, scale)
        return b

    def bulk_line_mean(self, i, j, scale):
        """Bulk mean at lattice site (i, j), including line-source bonuses.

        This is the mean that also determines sigma; the boundary source does not.
        """
        i = np.asarray(i)
        j = np.asarray(j)
        m = self.bulk_mean_at(i / scale, j / scale) + self._line_bonus(i, j, scale)
        return float(m) if np.ndim(m) == 0 else m

    def effective_mean(self, i, j, scale):
        """Total site mean: bulk + line bonuses, plus mu_s when i=0 or j=0."""
        i = np.asarray(i)
        j = np.asarray(j)
        m = self.bulk_line_mean(i, j, scale) + self.boundary_source_at(i / scale, j / scale)
        return float(m) if np.ndim(m) == 0 else m

    def sigma_site(self, i, j, scale):
        """Sigma at lattice site (i, j): slaved to the bulk(+line) mean."""
        return sigma_from_mean(self.family, self.bulk_line_mean(i, j, scale))

    def point_mu(self, x1, x2, with_boundary=True, line_tol=1e-12):
        """Continuum mean at a point, counting line sources only on their lines."""
        m = self.bulk_mean_at(x1, x2)
        for src in self.line_sources:
            if src.contains_point(x1, x2, line_tol):
                m += src.strength
        if with_boundary:
            m += self.boundary_source_at(x1, x2)
        return m

    def point_sigma(self, x1, x2, line_tol=1e-12):
        return sigma_from_mean(self.family, self.point_mu(x1, x2, with_boundary=False, line_tol=line_tol))

    def has_diagonal_source(self):
        """Diagonal sources sit outside the continuum-limit hypotheses."""
        return any(s.axis == "diagonal" for s in self.line_sources)


# ---------------------------------------------------------------------------
# Presets


def _lambda1(x1, x2):
    return np.where((x1 >= 0.5) | (x2 >= 0.5), 1.0, 0.0)


def _lambda2(x1, x2):
    d1 = (x1 - 0.25) ** 2 + (x2 - 0.75) ** 2
    d2 = (x1 - 0.75) ** 2 + (x2 - 0.25) ** 2
    return np.exp(-10.0 * d1) + np.exp(-10.0 * d2)


def _lambda3(x1, x2):
    d1 = (x1 - 1.0) ** 2 + x2**2
    d2 = x1**2 + (x2 - 1.0) ** 2
    return np.where((d1 <= 0.49) | (d2 <= 0.49), 0.5, 1.0)


def _geo_q_mean(x1, x2):
    # parameter field q = 0.5 if x1 >= 0.5 or x2 >= 0.5 else 1; mean = (1-q)/q
    q = np.where((x1 >= 0.5) | (x2 >= 0.5), 0.5, 1.0)
    return (1.0 - q) / q


def _constant(mu):
    def f(x1, x2):
        return np.full(np.broadcast(x1, x2).shape, float(mu))

    return f


PRESET_NAMES = (
    "lambda1",
    "lambda2",
    "lambda3",
    "geo_q",
    "constant(mu)",
    "slow_bond(r)",
    "line_source(axis, offset, strength)",
)


def preset(name: str, **params) -> WeightField:
    """Build a named weight field.

    Accepts either preset("slow_bond", r=0.5) or the string form
    preset("slow_bond(0.5)").  Unknown names raise a ValueError that lists
    the available presets.
    """
    name = name.strip()
    if "(" in name and name.endswith(")"):
        base, argstr = name.split("(", 1)
        base = base.strip()
        args = [a.strip() for a in argstr[:-1].split(",") if a.strip()]
        if base == "constant" and args:
            params.setdefault("mu", float(args[0]))
        elif base == "slow_bond" and args:
            params.setdefault("r", float(args[0]))
        elif base == "line_source" and args:
            params.setdefault("axis", args[0].strip("'\""))
            if len(args) > 1:
                params.setdefault("offset", float(args[1]))
            if len(args) > 2:
                params.setdefault("strength", float(args[2]))
        name = base

    if name == "lambda1":
        return WeightField(DistributionFamily.EXPONENTIAL, _lambda1, description="lambda1")
    if name == "lambda2":
        return WeightField(DistributionFamily.EXPONENTIAL, _lambda2, description="lambda2")
    if name == "lambda3":
        return WeightField(DistributionFamily.EXPONENTIAL, _lambda3, description="lambda3")
    if name == "geo_q":
        return WeightField(DistributionFamily.GEOMETRIC, _geo_q_mean, description="geo_q")
    if name == "constant":
        mu = float(params.get("mu", 1.0))
        family = params.get("family", DistributionFamily.EXPONENTIAL)
        if isinstance(family, str):
            family = DistributionFamily(family)
        return WeightField(family, _constant(mu), description=f"constant(mu={mu:g})")
    if name == "slow_bond":
        r = float(params.get("r", 1.0))
        if not (0 < r <= 1):
            raise ValueError("slow bond rate r must lie in (0, 1]")
        src = LineSource("diagonal", 0.0, 1.0 / r - 1.0)
        return WeightField(
            DistributionFamily.EXPONENTIAL,
            _constant(1.0),
            line_sources=(src,),
            description=f"slow_bond(r={r:g})",
        )
    if name == "line_source":
        axis = params.get("axis", "horizontal")
        offset = float(params.get("offset", 0.25))
        strength = float(params.get("strength", 2.0))
        mu = float(params.get("mu", 1.0))
        src = LineSource(axis, offset, strength)
        return WeightField(
            DistributionFamily.EXPONENTIAL,
            _constant(mu),
            line_sources=(src,),
            description=f"line_source({axis}, {offset:g}, {strength:g})",
        )
    raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
