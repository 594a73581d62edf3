"""Input validation helpers shared across the package.

All user-facing entry points validate through these functions so that error
messages are uniform and downstream code can assume clean scalars/arrays.
"""
from __future__ import annotations

import math
import numbers

import numpy as np


def as_float(name, value, *, minimum=None, maximum=None, exclusive_min=False):
    """Coerce ``value`` to a finite float, optionally range-checked."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v!r}")
    if minimum is not None:
        if exclusive_min:
            if v <= minimum:
                raise ValueError(f"{name} must be > {minimum}, got {v}")
        elif v < minimum:
            raise ValueError(f"{name} must be >= {minimum}, got {v}")
    if maximum is not None and v > maximum:
        raise ValueError(f"{name} must be <= {maximum}, got {v}")
    return v


def as_index(name, value, *, minimum=1):
    """Coerce ``value`` to an int >= ``minimum`` (bools and non-integers rejected)."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    v = int(value)
    if v < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {v}")
    return v


def as_time(name, value, horizon):
    """Validate a time point against the horizon [0, T]."""
    v = as_float(name, value)
    if v < 0.0 or v > horizon:
        raise ValueError(f"{name} must lie in [0, {horizon}], got {v}")
    return v


def as_array_1d(name, values, *, min_len=0):
    """Coerce to a 1-d float array of finite values."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} must have at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr
