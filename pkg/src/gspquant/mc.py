"""Monte Carlo cross-check of the distortion brackets.

Paths are sampled through their expansion coordinates: truncation-many
independent standard normals per sample, generated by the counter-based
Philox generator so that sample i is a pure function of (seed, i) and the
estimate is bit-identical however the work is scheduled.  Normal variates
come from the inverse cdf (scipy ndtri, double precision, far beyond the
1e-9 requirement) applied to one uniform per coordinate; each sample's
draws occupy a whole number of Philox blocks so per-sample and batched
generation agree exactly.

The distortion of a sample against a product codebook is evaluated in
coefficient space,

    sum_{j<=m} lambda_j (xi_j - c*_j)^2 + sum_{m<j<=m'} lambda_j xi_j^2,

plus the analytic midpoint of the tail beyond the truncation m', whose
bracket half-width is folded into the reported standard error.
``path_space_check`` validates the coefficient-space shortcut against
direct Gauss-Legendre quadrature of |X - a|^2 on rendered paths.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import ndtri

from .funcquant import ProductQuantizer, codebook_paths
from .spectrum import Spectrum, eigenfunction
from .validation import as_index

_TINY_UNIFORM = 2.0**-54  # floor keeps ndtri finite if random() returns 0.0

__all__ = [
    "McConfig",
    "McEstimate",
    "sample_coefficients",
    "estimate_distortion",
    "path_space_check",
]


@dataclass(frozen=True)
class McConfig:
    """Sampling configuration: sample count, 64-bit seed, truncation m', grid size."""

    samples: int
    seed: int
    truncation: int
    grid: int = 256

    def __post_init__(self):
        object.__setattr__(self, "samples", as_index("samples", self.samples))
        object.__setattr__(self, "seed", as_index("seed", self.seed, minimum=0))
        object.__setattr__(self, "truncation", as_index("truncation", self.truncation))
        object.__setattr__(self, "grid", as_index("grid", self.grid, minimum=64))


@dataclass(frozen=True)
class McEstimate:
    """Estimated distortion with its standard error and the sample count used."""

    mean: float
    stderr: float
    samples: int


def _blocks_per_sample(truncation: int) -> int:
    # One Philox block yields 4 uint64 words = 4 doubles.
    return (truncation + 3) // 4


def _normalize(u: np.ndarray) -> np.ndarray:
    return ndtri(np.maximum(u, _TINY_UNIFORM))


def sample_coefficients(spectrum: Spectrum, truncation: int, seed: int, index: int = 0) -> np.ndarray:
    """Standard normal coordinates of sample ``index`` under ``seed``.

    Deterministic in (seed, index): the sample occupies Philox blocks
    [index * ceil(m'/4), ...), so it can be regenerated in isolation or as a
    row of the batched matrix with identical bits.
    """
    truncation = as_index("truncation", truncation)
    if truncation > len(spectrum):
        raise ValueError(f"truncation {truncation} exceeds spectrum length {len(spectrum)}")
    seed = as_index("seed", seed, minimum=0)
    index = as_index("index", index, minimum=0)
    bits = Philox(key=seed)
    bits = bits.advance(index * _blocks_per_sample(truncation))
    u = Generator(bits).random(4 * _blocks_per_sample(truncation))[:truncation]
    return _normalize(u)


def _coefficient_matrix(seed: int, samples: int, truncation: int) -> np.ndarray:
    words = 4 * _blocks_per_sample(truncation)
    u = Generator(Philox(key=seed)).random((samples, words))[:, :truncation]
    return _normalize(u)


def _core_and_tail_terms(pq: ProductQuantizer, xi: np.ndarray) -> np.ndarray:
    lam = pq.spectrum.lambdas[: xi.shape[1]]
    per_sample = np.zeros(xi.shape[0])
    for j, q in enumerate(pq.quantizers):
        idx = np.searchsorted(q.base.boundaries, xi[:, j], side="left")
        per_sample += lam[j] * (xi[:, j] - q.base.points[idx]) ** 2
    m = len(pq.quantizers)
    if xi.shape[1] > m:
        per_sample += (xi[:, m:] ** 2) @ lam[m:]
    return per_sample


def estimate_distortion(pq: ProductQuantizer, cfg: McConfig) -> McEstimate:
    """Sample-mean estimate of the codebook distortion with standard error.

    The deterministic tail beyond the truncation enters as the midpoint of
    its bracket; the bracket half-width is folded into ``stderr`` in
    quadrature so the reported uncertainty covers the analytic part too.
    """
    m = len(pq.quantizers)
    if cfg.truncation < m:
        raise ValueError(f"truncation {cfg.truncation} below allocation length {m}")
    if cfg.truncation > len(pq.spectrum):
        raise ValueError(
            f"truncation {cfg.truncation} exceeds spectrum length {len(pq.spectrum)}"
        )
    xi = _coefficient_matrix(cfg.seed, cfg.samples, cfg.truncation)
    per_sample = _core_and_tail_terms(pq, xi)
    tail_lo, tail_hi = pq.spectrum.tail_after(cfg.truncation)
    tail_mid = 0.5 * (tail_lo + tail_hi)
    tail_half = 0.5 * (tail_hi - tail_lo)
    mean = float(np.mean(per_sample)) + tail_mid
    if cfg.samples > 1:
        stat = math.sqrt(float(np.var(per_sample, ddof=1)) / cfg.samples)
    else:
        stat = 0.0
    return McEstimate(
        mean=mean,
        stderr=math.hypot(stat, tail_half),
        samples=cfg.samples,
    )


@functools.lru_cache(maxsize=32)
def _gauss_legendre(n: int, T: float):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    t = 0.5 * T * (nodes + 1.0)
    w = 0.5 * T * weights
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def path_space_check(pq: ProductQuantizer, cfg: McConfig) -> float:
    """Max |coefficient-space min dist^2 - quadrature min dist^2| over samples.

    Sampled paths are truncated at m' coordinates; the quadrature side
    renders the same truncated paths and every codeword on a Gauss-Legendre
    rule with cfg.grid nodes and takes the minimum of the discretized
    squared L^2 distance.  The gap is quadrature-limited and shrinks (down
    to roundoff) as the grid grows.
    """
    m = len(pq.quantizers)
    if cfg.truncation < m:
        raise ValueError(f"truncation {cfg.truncation} below allocation length {m}")
    if cfg.truncation > len(pq.spectrum):
        raise ValueError(
            f"truncation {cfg.truncation} exceeds spectrum length {len(pq.spectrum)}"
        )
    params = pq.spectrum.params
    t, w = _gauss_legendre(cfg.grid, params.T)
    xi = _coefficient_matrix(cfg.seed, cfg.samples, cfg.truncation)
    coef_min = _core_and_tail_terms(pq, xi)
    lam = pq.spectrum.lambdas[: cfg.truncation]
    basis = np.array(
        [eigenfunction(pq.spectrum.pairs[j], params, t) for j in range(cfg.truncation)]
    )
    sample_paths = (xi * np.sqrt(lam)) @ basis
    grid_min = np.full(cfg.samples, np.inf)
    for path in codebook_paths(pq, t):
        diff = sample_paths - path.values
        grid_min = np.minimum(grid_min, (diff * diff) @ w)
    return float(np.max(np.abs(coef_min - grid_min)))
