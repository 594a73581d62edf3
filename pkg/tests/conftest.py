"""Shared oracles and fixtures.

The oracles here deliberately avoid the package's own numerical paths:
root locations come from plain interval bisection, integrals from
Gauss-Legendre quadrature or scipy adaptive quadrature.  Frozen constants
in the test modules were produced by these oracles and cross-checked
before being committed.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

HALF_PI = math.pi / 2.0


def bisect_root(kappa: float, offset: float, iters: int = 200) -> float:
    """Bisection-only oracle for cot(u) = kappa * (offset + u) on (0, pi/2).

    Independent of the production solver: no Newton, no warm start.
    Returns offset + u.
    """
    lo, hi = 1e-300, HALF_PI
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        g = 1.0 / math.tan(mid) - kappa * (offset + mid)
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return offset + 0.5 * (lo + hi)


def gauss_legendre(a: float, b: float, n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@pytest.fixture(scope="session")
def gl_rule():
    return gauss_legendre
