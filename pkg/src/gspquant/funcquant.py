"""Product quantizers of the process built on its eigenbasis expansion.

The process expands as X = sum_j sqrt(lambda_j) xi_j phi_j with independent
standard normal coordinates xi_j.  A product codebook quantizes the first m
coordinates with optimal scalar codebooks of sizes n_1 >= ... >= n_m >= 2
(product <= budget) and leaves the rest unquantized, so the expected
minimum squared distance decomposes exactly as

    sum_{j<=m} lambda_j d(n_j)  +  sum_{j>m} lambda_j,

with d(n) the scalar normal distortion.  The trailing sum is reported as a
rigorous interval (computed eigenvalues enter exactly, the remainder uses
the analytic enclosure), so every distortion here is a bracket, not a point
estimate.

Level vectors are restricted to non-increasing shape: with lambda_j
decreasing and d(n) decreasing, swapping any out-of-order pair never
increases the distortion, so some optimal allocation has this form and the
search space shrinks to compositions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import gauss1d
from .kernel import ProcessParams, trace
from .spectrum import Spectrum, eigenfunction, spectrum_batch
from .validation import as_array_1d, as_index

RENDER_CAP = 4096
EXHAUSTIVE_CAP = 2**14
LEVEL_CAP = 1024

__all__ = [
    "Allocation",
    "CoordinateQuantizer",
    "ProductQuantizer",
    "QuantizedPath",
    "FunctionalQuantizer",
    "allocate",
    "build",
    "exact_distortion",
    "codebook_paths",
    "nearest",
]


@dataclass(frozen=True)
class Allocation:
    """Levels per coordinate (non-increasing, each >= 2, product <= budget)."""

    levels: tuple[int, ...]
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(v) for v in self.levels))
        object.__setattr__(self, "budget", as_index("budget", self.budget))
        for v in self.levels:
            if v < 2:
                raise ValueError(f"levels must all be >= 2, got {self.levels}")
        if any(a < b for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError(f"levels must be non-increasing, got {self.levels}")
        if self.codebook_size > self.budget:
            raise ValueError(
                f"product of levels {self.codebook_size} exceeds budget {self.budget}"
            )

    @property
    def codebook_size(self) -> int:
        return math.prod(self.levels)


@dataclass(frozen=True)
class CoordinateQuantizer:
    """Scalar codebook of one coordinate, scaled by sqrt(lambda)."""

    ell: int
    lam: float
    base: gauss1d.ScalarQuantizer

    @property
    def scale(self) -> float:
        return math.sqrt(self.lam)

    @property
    def points(self) -> np.ndarray:
        return self.scale * self.base.points

    @property
    def boundaries(self) -> np.ndarray:
        return self.scale * self.base.boundaries

    @property
    def distortion(self) -> float:
        return self.lam * self.base.distortion


@dataclass(frozen=True)
class ProductQuantizer:
    """Product codebook plus its exact distortion decomposition.

    ``tail`` brackets the unquantized remainder sum_{j>m} lambda_j; the total
    distortion interval is distortion_core + tail.  With no quantized
    coordinates the single codeword is the zero path and the bracket
    collapses to the exact trace k*T + T^2/2.
    """

    spectrum: Spectrum
    allocation: Allocation
    quantizers: tuple[CoordinateQuantizer, ...]
    distortion_core: float
    tail: tuple[float, float]

    @property
    def codebook_size(self) -> int:
        return self.allocation.codebook_size


@dataclass(frozen=True)
class QuantizedPath:
    """One codeword rendered on a time grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")


def _required_length(budget: int) -> int:
    # Longest feasible allocation: all levels equal to 2.
    return max(1, budget.bit_length() - 1)


def _allocate_exhaustive(lam: np.ndarray, budget: int, level_cap: int, dtable: list[float]):
    # Objective relative to the unquantized process: sum lambda_j (d(n_j) - 1).
    # The tail constant drops out, so the same argmin serves either bracket
    # endpoint.  Ties resolve to the lexicographically smaller level vector.
    m_max = lam.size
    suffix = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])
    best_obj = 0.0  # empty allocation
    best_levels: tuple[int, ...] = ()
    gain = [dtable[v] - 1.0 for v in range(level_cap + 1)]  # gain[v] <= 0

    def rec(j, rem, cap, acc, prefix):
        nonlocal best_obj, best_levels
        top = min(cap, rem)
        if j >= m_max or top < 2:
            return
        # Optimistic completion: every remaining coordinate at the largest
        # allowed level, ignoring budget depletion.  Valid lower bound on
        # any extension of this prefix, so strict excess prunes the branch.
        if acc + gain[top] * suffix[j] > best_obj:
            return
        for v in range(top, 1, -1):
            obj = acc + lam[j] * gain[v]
            prefix.append(v)
            if obj < best_obj or (obj == best_obj and tuple(prefix) < best_levels):
                best_obj = obj
                best_levels = tuple(prefix)
            rec(j + 1, rem // v, v, obj, prefix)
            prefix.pop()

    rec(0, budget, level_cap, 0.0, [])
    return best_levels


def _allocate_greedy(lam: np.ndarray, budget: int, level_cap: int, dtable: list[float]):
    m_max = lam.size
    levels: list[int] = []
    product = 1
    while True:
        best_gain = 0.0
        best_move = None
        for j, v in enumerate(levels):
            if v >= level_cap or (j > 0 and v + 1 > levels[j - 1]):
                continue
            if product // v * (v + 1) > budget:
                continue
            gain = lam[j] * (dtable[v + 1] - dtable[v])
            if gain < best_gain:
                best_gain = gain
                best_move = j
        if len(levels) < m_max and product * 2 <= budget:
            gain = lam[len(levels)] * (dtable[2] - 1.0)
            if gain < best_gain:
                best_gain = gain
                best_move = len(levels)
        if best_move is None:
            return tuple(levels)
        if best_move == len(levels):
            levels.append(2)
            product *= 2
        else:
            product = product // levels[best_move] * (levels[best_move] + 1)
            levels[best_move] += 1


def allocate(
    spectrum: Spectrum,
    budget: int,
    method: str = "exhaustive",
    level_cap: int = LEVEL_CAP,
) -> Allocation:
    """Distortion-minimizing level vector under the codebook budget.

    "exhaustive" enumerates every non-increasing level vector with product
    <= budget (feasible up to budget 2^14); "greedy" raises one coordinate's
    level by 1 at a time, taking the largest marginal distortion decrease.
    Levels above ``level_cap`` are never considered: at these budgets a
    coordinate already at the cap gains less from further splitting than a
    factor-2 level spent anywhere else, so capped vectors dominate.
    """
    budget = as_index("budget", budget)
    if method not in ("exhaustive", "greedy"):
        raise ValueError(f"method must be 'exhaustive' or 'greedy', got {method!r}")
    if method == "exhaustive" and budget > EXHAUSTIVE_CAP:
        raise ValueError(
            f"exhaustive search supports budgets up to {EXHAUSTIVE_CAP}; use method='greedy'"
        )
    needed = _required_length(budget)
    if len(spectrum) < needed:
        raise ValueError(
            f"spectrum has {len(spectrum)} pairs; budget {budget} needs at least {needed}"
        )
    if budget == 1:
        return Allocation(levels=(), budget=1)
    cap = min(level_cap, budget)
    dtable = [1.0] * (cap + 1)
    for n in range(2, cap + 1):
        dtable[n] = gauss1d.optimize(n).distortion
    lam = spectrum.lambdas[:needed]
    if method == "exhaustive":
        levels = _allocate_exhaustive(lam, budget, cap, dtable)
    else:
        levels = _allocate_greedy(lam, budget, cap, dtable)
    return Allocation(levels=levels, budget=budget)


def build(spectrum: Spectrum, allocation: Allocation) -> ProductQuantizer:
    """Assemble the per-coordinate scaled codebooks and distortion fields."""
    m = len(allocation.levels)
    if m > len(spectrum):
        raise ValueError(f"allocation needs {m} coordinates, spectrum has {len(spectrum)}")
    quantizers = tuple(
        CoordinateQuantizer(ell=pair.ell, lam=pair.lam, base=gauss1d.optimize(n))
        for pair, n in zip(spectrum.pairs, allocation.levels)
    )
    core = math.fsum(q.distortion for q in quantizers)
    if m == 0:
        exact = trace(spectrum.params)
        tail = (exact, exact)
    else:
        tail = spectrum.tail_after(m)
    return ProductQuantizer(
        spectrum=spectrum,
        allocation=allocation,
        quantizers=quantizers,
        distortion_core=core,
        tail=tail,
    )


def exact_distortion(pq: ProductQuantizer) -> tuple[float, float]:
    """Bracket for E min over the codebook of |X - a|^2 in L^2([0, T])."""
    return pq.distortion_core + pq.tail[0], pq.distortion_core + pq.tail[1]


def nearest(pq: ProductQuantizer, coefficients) -> tuple[int, ...]:
    """Per-coordinate nearest codeword indices for one coefficient vector.

    ``coefficients`` are the unit-variance coordinates xi_j (the process
    coordinate is sqrt(lambda_j) xi_j; scaling does not change the argmin).
    Valid because the closest-neighbor rule in L^2 decomposes coordinatewise
    over an orthonormal basis for product codebooks.  Boundary ties go to
    the lower index.
    """
    xi = as_array_1d("coefficients", coefficients)
    m = len(pq.allocation.levels)
    if xi.size < m:
        raise ValueError(f"coefficient vector has {xi.size} entries, need >= {m}")
    return tuple(
        int(np.searchsorted(q.base.boundaries, xi[j], side="left"))
        for j, q in enumerate(pq.quantizers)
    )


def codebook_paths(pq: ProductQuantizer, grid) -> list[QuantizedPath]:
    """Render every codeword on the given time grid.

    Codewords are emitted in row-major order of the per-coordinate indices
    (the first coordinate varies slowest), matching ``nearest`` tuples.
    """
    grid = as_array_1d("grid", grid, min_len=1)
    if np.any(grid < 0.0) or np.any(grid > pq.spectrum.params.T):
        raise ValueError("grid must lie within [0, T]")
    if np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    size = pq.codebook_size
    if size > RENDER_CAP:
        raise ValueError(f"codebook size {size} exceeds rendering cap {RENDER_CAP}")
    grid = grid.copy()
    grid.setflags(write=False)
    m = len(pq.quantizers)
    if m == 0:
        return [QuantizedPath(grid=grid, values=np.zeros_like(grid))]
    basis = np.array(
        [eigenfunction(pq.spectrum.pairs[j], pq.spectrum.params, grid) for j in range(m)]
    )
    scaled = [q.points for q in pq.quantizers]
    paths = []
    for combo in itertools.product(*(range(q.base.n) for q in pq.quantizers)):
        coeffs = np.array([scaled[j][i] for j, i in enumerate(combo)])
        paths.append(QuantizedPath(grid=grid, values=coeffs @ basis))
    return paths


class FunctionalQuantizer(BaseEstimator):
    """Estimator front end: fit a product codebook for one parameter set.

    ``fit`` solves the spectrum, searches the level allocation and builds
    the codebook; ``predict`` maps arrays of unit-variance coordinate
    vectors to per-coordinate codeword indices and ``transform`` to the
    quantized coordinate values.

    Attributes
    ----------
    spectrum_ : Spectrum
    allocation_ : Allocation
    quantizer_ : ProductQuantizer
    distortion_bounds_ : (float, float)
    """

    def __init__(
        self,
        k: float = 0.0,
        T: float = 1.0,
        budget: int = 64,
        method: str = "exhaustive",
        spectrum_size: int = 64,
        tol: float = 1e-12,
    ):
        self.k = k
        self.T = T
        self.budget = budget
        self.method = method
        self.spectrum_size = spectrum_size
        self.tol = tol

    def fit(self, X=None, y=None):
        params = ProcessParams(k=self.k, T=self.T)
        self.spectrum_ = spectrum_batch(params, self.spectrum_size, self.tol)
        self.allocation_ = allocate(self.spectrum_, self.budget, self.method)
        self.quantizer_ = build(self.spectrum_, self.allocation_)
        self.distortion_bounds_ = exact_distortion(self.quantizer_)
        return self

    def _coefficient_matrix(self, X):
        check_is_fitted(self, "quantizer_")
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        m = len(self.allocation_.levels)
        if arr.ndim != 2 or arr.shape[1] < m:
            raise ValueError(f"X must be (n_samples, >= {m}), got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("X must contain only finite values")
        return arr, m

    def predict(self, X):
        """Codeword index per coordinate, shape (n_samples, n_coordinates)."""
        arr, m = self._coefficient_matrix(X)
        out = np.empty((arr.shape[0], m), dtype=int)
        for j, q in enumerate(self.quantizer_.quantizers):
            out[:, j] = np.searchsorted(q.base.boundaries, arr[:, j], side="left")
        return out

    def transform(self, X):
        """Quantized unit-variance coordinates, shape (n_samples, n_coordinates)."""
        arr, m = self._coefficient_matrix(X)
        idx = self.predict(arr)
        out = np.empty_like(idx, dtype=float)
        for j, q in enumerate(self.quantizer_.quantizers):
            out[:, j] = q.base.points[idx[:, j]]
        return out
