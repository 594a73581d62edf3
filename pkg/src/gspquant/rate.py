"""Asymptotic rate machinery for the quantization error.

Covers the sharp-rate constant for regularly varying eigenvalue envelopes
phi(x) = c x^(-b) (ln x)^(-a) with b > 1, the two-sided
Theta((ln n)^(-1/2)) bounds with constants sqrt(2) T / pi and
sqrt(3) T / pi, the sharp coefficient sqrt(2 c_inf) T / pi implied by a
convergent eigenvalue ratio sequence, and empirical fitting of computed
distortion curves against ln n.

Everything here is a pure function of its arguments; the error/distortion
scale convention is: exponent -1/2 for the error e_n corresponds to
exponent -1 for the distortion e_n^2, and ``fit_rate`` works on distortion
because that is what the pipeline computes natively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import ProcessParams
from .spectrum import CSeqEntry
from .validation import as_float, as_index

# Upper/lower coefficient ratio sqrt(3)/sqrt(2); the upper bound is defined
# as exactly this multiple of the lower one.
THETA_RATIO = math.sqrt(1.5)

__all__ = [
    "RegVarying",
    "SharpRate",
    "RateFit",
    "CInfEstimate",
    "THETA_RATIO",
    "sharp_constant",
    "theta_bounds",
    "theta_bounds_from_log",
    "remark_constant",
    "estimate_c_inf",
    "fit_rate",
]


@dataclass(frozen=True)
class RegVarying:
    """Eigenvalue envelope phi(x) = c * x^(-b) * (ln x)^(-a), b > 1."""

    c: float
    b: float
    a: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", as_float("c", self.c, minimum=0.0, exclusive_min=True))
        object.__setattr__(self, "b", as_float("b", self.b))
        object.__setattr__(self, "a", as_float("a", self.a))
        if self.b <= 1.0:
            raise ValueError(f"index b must be > 1, got {self.b}")


@dataclass(frozen=True)
class SharpRate:
    """e_n ~ coefficient * (ln n)^(-log_exponent) * (ln ln n)^(-loglog_exponent)."""

    coefficient: float
    log_exponent: float
    loglog_exponent: float


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit distortion ~ coefficient * (ln n)^exponent."""

    coefficient: float
    exponent: float
    r2: float


@dataclass(frozen=True)
class CInfEstimate:
    """Extrapolated limit of the eigenvalue ratio sequence.

    ``band`` is the half-width of the fit residual band over the window
    (max absolute residual of the fitted 1/ell model).
    """

    estimate: float
    band: float
    window_size: int


def sharp_constant(phi: RegVarying) -> SharpRate:
    """Sharp rate for eigenvalues lambda_j ~ phi(j).

    e_n ~ (c (b/2)^(b-1) b/(b-1))^(1/2) (ln n)^(-(b-1)/2) (ln ln n)^(-a/2).
    """
    c, b, a = phi.c, phi.b, phi.a
    coefficient = math.sqrt(c * (b / 2.0) ** (b - 1.0) * b / (b - 1.0))
    return SharpRate(
        coefficient=coefficient,
        log_exponent=(b - 1.0) / 2.0,
        loglog_exponent=a / 2.0,
    )


def theta_bounds_from_log(params: ProcessParams, log_n: float) -> tuple[float, float]:
    """Two-sided error bounds at a directly supplied ln n > 0.

    lower = sqrt(2) T / pi * (ln n)^(-1/2); upper is exactly
    THETA_RATIO * lower, i.e. the sqrt(3) T / pi coefficient.
    """
    log_n = as_float("log_n", log_n, minimum=0.0, exclusive_min=True)
    lower = math.sqrt(2.0) * params.T / math.pi / math.sqrt(log_n)
    return lower, lower * THETA_RATIO


def theta_bounds(params: ProcessParams, n: int) -> tuple[float, float]:
    """Two-sided bounds on the error at codebook size n >= 2."""
    n = as_index("n", n, minimum=2)
    return theta_bounds_from_log(params, math.log(n))


def remark_constant(c_inf: float, T: float) -> float:
    """Sharp coefficient sqrt(2 c_inf) T / pi implied by c_ell -> c_inf.

    Delegates to ``sharp_constant`` with the envelope
    c_inf * T^2 / pi^2 * x^(-2), so the specialization c_inf = 1 agrees with
    the classical Wiener coefficient bit for bit.
    """
    c_inf = as_float("c_inf", c_inf, minimum=1.0)
    T = as_float("T", T, minimum=0.0, exclusive_min=True)
    envelope = RegVarying(c=c_inf * T * T / (math.pi * math.pi), b=2.0, a=0.0)
    return sharp_constant(envelope).coefficient


def estimate_c_inf(cseq: list[CSeqEntry], window: float = 0.5) -> CInfEstimate:
    """Extrapolate the limit of c_ell from the tail of a computed sequence.

    Fits c_ell ~ c_inf + C / ell over the trailing ``window`` fraction,
    matching the O(1/ell) decay of the bracketing gap.  Heuristic model,
    reported with the residual band of the fit.
    """
    if len(cseq) < 100:
        raise ValueError(f"need at least 100 entries, got {len(cseq)}")
    window = as_float("window", window, minimum=0.0, exclusive_min=True, maximum=1.0)
    size = max(2, math.ceil(window * len(cseq)))
    tail = cseq[-size:]
    ell = np.array([e.ell for e in tail], dtype=float)
    c = np.array([e.c for e in tail], dtype=float)
    design = np.column_stack([np.ones_like(ell), 1.0 / ell])
    coef, *_ = np.linalg.lstsq(design, c, rcond=None)
    resid = c - design @ coef
    return CInfEstimate(
        estimate=float(coef[0]),
        band=float(np.max(np.abs(resid))),
        window_size=size,
    )


def fit_rate(points) -> RateFit:
    """Least squares of log(distortion) against log(ln n).

    ``points`` is an iterable of (n, distortion) with n >= 2 and positive
    distortion; at least 4 distinct n are required.  exponent -1 is the
    distortion-scale analogue of the error-scale exponent -1/2.
    """
    pts = [
        (as_float("n", n, minimum=2.0), as_float("distortion", d, minimum=0.0, exclusive_min=True))
        for n, d in points
    ]
    if len({n for n, _ in pts}) < 4:
        raise ValueError("need at least 4 points with distinct n >= 2")
    x = np.log(np.log([n for n, _ in pts]))
    y = np.log([d for _, d in pts])
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate design: all ln ln n equal")
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(
        coefficient=float(math.exp(coef[0])),
        exponent=float(coef[1]),
        r2=float(min(1.0, max(0.0, r2))),
    )
