"""Process parameters and covariance kernel.

The process is a Wiener path observed from a Gaussian starting point:
Z_t = W_{k+t} on [0, T], so Z_0 ~ N(0, k) and the covariance is
cov(Z_t, Z_s) = (k + t) ^ (k + s).  Setting k = 0 recovers the classical
Wiener process.
"""
from __future__ import annotations

from dataclasses import dataclass

from .validation import as_float, as_time


@dataclass(frozen=True)
class ProcessParams:
    """Pair (k, T): starting-point variance offset k >= 0 and horizon T > 0.

    Validated once at construction; every other module assumes a valid
    instance.
    """

    k: float
    T: float

    def __post_init__(self):
        object.__setattr__(self, "k", as_float("k", self.k, minimum=0.0))
        object.__setattr__(self, "T", as_float("T", self.T, minimum=0.0, exclusive_min=True))

    @property
    def slope(self) -> float:
        """Slope k/T of the line in the transcendental root equation."""
        return self.k / self.T


def covariance(params: ProcessParams, t, s) -> float:
    """Covariance (k + t) ^ (k + s); both times must lie in [0, T]."""
    t = as_time("t", t, params.T)
    s = as_time("s", s, params.T)
    return params.k + min(t, s)


def trace(params: ProcessParams) -> float:
    """Integral of the kernel diagonal, k*T + T^2/2.

    Equals the sum of all eigenvalues of the covariance operator, which is
    the global consistency check used by the spectral tests.
    """
    return params.k * params.T + 0.5 * params.T * params.T
