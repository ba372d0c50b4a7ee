"""Lattice weight sampling and last passage dynamic programming.

Randomness is counter based: row i of a sample is drawn from a Philox stream
keyed by (seed, i), so (seed, i, j) -> Y(i, j) is a pure function.  Two fields
sampled with the same seed share the same standard exponentials Y, which gives
the coupling monotonicity X1 <= X2 whenever mu1 <= mu2 (exponential family).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .weight_field import DistributionFamily, WeightField, geometric_nu

__all__ = [
    "LatticeSample",
    "PassageField",
    "trial_seed",
    "standard_exponential_row",
    "sample_lattice",
    "last_passage",
    "corner_passage_time",
    "optimal_path",
    "scaled_field",
    "run_trials",
    "TrialSummary",
]


def _row_generator(seed: int, row: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(row),))
    return np.random.Generator(np.random.Philox(ss))


def standard_exponential_row(seed: int, row: int, n: int) -> np.ndarray:
    """Mean-1 exponentials Y(row, 0..n-1) via inverse CDF -log(1-u)."""
    u = _row_generator(seed, row).random(n)
    return -np.log1p(-u)


def trial_seed(base_seed: int, k: int) -> int:
    """Derived seed for trial k; pure function of (base_seed, k)."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(0x7 + int(k),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class LatticeSample:
    """One realization of the weights X(i, j) on an (M+1) x (N+1) lattice."""

    weights: np.ndarray  # shape (rows, cols), indexed (i, j)
    scale_N: int
    seed: int
    family: DistributionFamily
    field_description: str

    @property
    def dims(self):
        return self.weights.shape


@dataclass(frozen=True)
class PassageField:
    """Last passage times L(i, j) from the origin for one sample."""

    L: np.ndarray
    sample: LatticeSample

    @property
    def dims(self):
        return self.L.shape


@dataclass(frozen=True)
class TrialSummary:
    trial: int
    seed: int
    corner: float  # L at the far corner
    scaled_corner: float  # corner / scale_N


def _weight_row(field: WeightField, i: int, ncols: int, scale_N: int, seed: int) -> np.ndarray:
    j = np.arange(ncols)
    y = standard_exponential_row(seed, i, ncols)
    if field.family is DistributionFamily.EXPONENTIAL:
        m = np.asarray(field.effective_mean(np.full(ncols, i), j, scale_N), float)
        if not np.all(np.isfinite(m)):
            bad = int(np.argmin(np.isfinite(m)))
            raise ValueError(f"non-finite mean at lattice site ({i}, {bad})")
        return m * y
    # Geometric: floor(nu * Y), with the boundary source entering through nu_s.
    nu = np.asarray(geometric_nu(field.bulk_line_mean(np.full(ncols, i), j, scale_N)), float)
    x1 = np.full(ncols, i) / scale_N
    x2 = j / scale_N
    mu_s = np.asarray(field.boundary_source_at(x1, x2), float)
    nu = nu + np.asarray(geometric_nu(mu_s), float)
    if not np.all(np.isfinite(nu)):
        bad = int(np.argmin(np.isfinite(nu)))
        raise ValueError(f"non-finite mean at lattice site ({i}, {bad})")
    return np.floor(nu * y)


def sample_lattice(field: WeightField, dims, scale_N: int, seed: int) -> LatticeSample:
    """Sample the weight lattice; dims is the array shape (M+1, N+1)."""
    rows, cols = int(dims[0]), int(dims[1])
    if rows < 1 or cols < 1 or scale_N < 1:
        raise ValueError("dims and scale_N must be positive")
    X = np.empty((rows, cols))
    for i in range(rows):
        X[i] = _weight_row(field, i, cols, scale_N, seed)
    return LatticeSample(X, int(scale_N), int(seed), field.family, field.description)


@njit(cache=True)
def _lp_kernel(X):
    rows, cols = X.shape
    L = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            a = L[i - 1, j] if i > 0 else 0.0
            b = L[i, j - 1] if j > 0 else 0.0
            L[i, j] = X[i, j] + max(a, b)
    return L


@njit(cache=True)
def _lp_row_kernel(prev, x_row, cur):
    n = x_row.shape[0]
    for j in range(n):
        b = cur[j - 1] if j > 0 else 0.0
        cur[j] = x_row[j] + max(prev[j], b)


def last_passage(sample: LatticeSample) -> PassageField:
    """L(i, j) = X(i, j) + max(L(i-1, j), L(i, j-1)), out-of-lattice terms 0."""
    return PassageField(_lp_kernel(sample.weights), sample)


def corner_passage_time(field: WeightField, dims, scale_N: int, seed: int) -> float:
    """L at the far corner, in O(cols) memory (weights generated row by row).

    Bit-identical to last_passage(sample_lattice(...)).L[-1, -1].
    """
    rows, cols = int(dims[0]), int(dims[1])
    prev = np.zeros(cols)
    cur = np.empty(cols)
    for i in range(rows):
        x_row = _weight_row(field, i, cols, scale_N, seed)
        _lp_row_kernel(prev, x_row, cur)
        prev, cur = cur, prev
    return float(prev[-1])


def optimal_path(pf: PassageField, endpoint) -> list:
    """A maximizing up/right path from (0, 0) to endpoint, by backtracking.

    Ties prefer the predecessor (i-1, j).  The returned list is origin-first
    and its weight sum equals L(endpoint) exactly.
    """
    i, j = int(endpoint[0]), int(endpoint[1])
    rows, cols = pf.dims
    if not (0 <= i < rows and 0 <= j < cols):
        raise ValueError(f"endpoint {endpoint} outside lattice of dims {pf.dims}")
    L = pf.L
    path = [(i, j)]
    while (i, j) != (0, 0):
        if i > 0 and (j == 0 or L[i - 1, j] >= L[i, j - 1]):
            i -= 1
        else:
            j -= 1
        path.append((i, j))
    path.reverse()
    return path


def scaled_field(pf: PassageField):
    """L / N on a grid of spacing 1/N, for comparison with the PDE solution."""
    from .hjb_solver import ValueGrid

    n = pf.sample.scale_N
    return ValueGrid(
        h=1.0 / n,
        values=pf.L / n,
        description=f"scaled sim ({pf.sample.field_description}, N={n}, seed={pf.sample.seed})",
        kind="scaled_passage",
    )


def run_trials(field: WeightField, dims, scale_N: int, n_trials: int, base_seed: int,
               threads: int = 1, corner_only: bool = True):
    """Independent trials with seeds derived by trial_seed(base_seed, k).

    Results are ordered by trial index, so the output is independent of the
    worker count.  With corner_only=False the full passage field is computed
    (same summaries, more memory).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")

    def one(k: int) -> TrialSummary:
        s = trial_seed(base_seed, k)
        if corner_only:
            corner = corner_passage_time(field, dims, scale_N, s)
        else:
            pf = last_passage(sample_lattice(field, dims, scale_N, s))
            corner = float(pf.L[-1, -1])
        return TrialSummary(k, s, corner, corner / scale_N)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, range(n_trials)))
    return [one(k) for k in range(n_trials)]
