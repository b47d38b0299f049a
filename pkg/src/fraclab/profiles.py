"""Smooth cutoff profiles.

The same C-infinity transition function drives the dyadic partition of
unity, spectral low-frequency cutoffs, and the compactly supported windows
used by the test-function factory.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import ConstructionError


def smooth_step(t):
    """C-infinity monotone step: 0 for t <= 0, 1 for t >= 1.

    On (0, 1) equals e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}), evaluated in the
    numerically stable logistic form 1 / (1 + exp(1/t - 1/(1-t))).
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    tm = t[mid]
    out[mid] = expit(-(1.0 / tm - 1.0 / (1.0 - tm)))
    return out if out.ndim else float(out)


def validate_profile(profile) -> None:
    """Reject transition profiles that are not monotone steps from 0 to 1."""
    t = np.linspace(0.0, 1.0, 513)
    v = np.asarray(profile(t), dtype=float)
    if abs(v[0]) > 1e-12 or abs(v[-1] - 1.0) > 1e-12:
        raise ConstructionError("profile must satisfy theta(0) = 0 and theta(1) = 1")
    if np.any(np.diff(v) < -1e-12):
        raise ConstructionError("profile must be monotone on [0, 1]")


def radial_step(r, r_one: float, r_zero: float, profile=smooth_step):
    """Radial cutoff: 1 for r <= r_one, 0 for r >= r_zero, smooth between.

    The transition runs profile((r_zero - r) / (r_zero - r_one)), so the
    endpoint values are exact.
    """
    if not r_one < r_zero:
        raise ConstructionError(f"need r_one < r_zero, got {r_one}, {r_zero}")
    r = np.asarray(r, dtype=float)
    return profile((r_zero - r) / (r_zero - r_one))
