"""Dyadic Littlewood-Paley analysis.

The partition of unity is built from a single smooth radial bump eta with
supp eta inside the annulus {1/2 <= |omega| <= 2} and eta identically 1 on
{1 <= |omega| <= 3/2}; the scaled copies eta(2^-j omega) telescope to 1 on
the covered dyadic range.  Block operators M_j restrict a field's spectrum
to the j-th annulus; the weighted square function of the blocks computes
the smoothness norms.

Because scaling by powers of two is exact in binary floating point, the
telescoping sum of the bumps is exactly 1 (not merely close to 1) at every
covered grid frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .grid import (
    REAL,
    Field,
    GridSpec,
    SpectrumField,
    forward_transform,
    inverse_transform,
    quadrature_lp_norm,
)
from .profiles import radial_step, smooth_step, validate_profile

# Residual allowed in the partition-of-unity identity on the covered range.
UNITY_TOL = 1e-12

# Maximum relative spectral energy outside the covered annuli.
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class DyadicPartition:
    """The family {eta(2^-j .)} for j in [jmin, jmax]."""

    jmin: int
    jmax: int
    profile: Callable = field(default=smooth_step)

    def __post_init__(self):
        if not (isinstance(self.jmin, int) and isinstance(self.jmax, int)):
            raise DomainError("jmin and jmax must be integers")
        if not self.jmin < 0 < self.jmax:
            raise DomainError(
                f"dyadic range must satisfy jmin < 0 < jmax, got [{self.jmin}, {self.jmax}]"
            )

    @property
    def js(self) -> range:
        return range(self.jmin, self.jmax + 1)

    def psi(self, r):
        """Radial low-pass: 1 on r <= 3/2, supported in r < 2."""
        return radial_step(r, 1.5, 2.0, self.profile)

    def eta(self, r):
        """Mother bump psi(r) - psi(2r)."""
        return self.psi(r) - self.psi(2.0 * r)

    def eta_j(self, omega_abs, j: int):
        """eta(2^-j |omega|); the power-of-two scaling is exact."""
        return self.eta(np.asarray(omega_abs) * 2.0 ** (-j))

    def unity_sum(self, omega_abs) -> np.ndarray:
        total = np.zeros_like(np.asarray(omega_abs, dtype=float))
        for j in self.js:
            total = total + self.eta_j(omega_abs, j)
        return total

    def covered_mask(self, grid: GridSpec) -> np.ndarray:
        """Grid frequencies at which the partition sums exactly to one.

        The zero frequency is excluded: blocks act modulo grid constants.
        """
        w = grid.frequency_norm()
        mask = np.abs(self.unity_sum(w) - 1.0) <= UNITY_TOL
        mask[(0,) * grid.d] = False
        return mask


def build_partition(jmin: int, jmax: int, profile: Callable = smooth_step) -> DyadicPartition:
    """Construct the dyadic partition after validating the profile."""
    if not jmin < jmax:
        raise DomainError(f"need jmin < jmax, got {jmin} >= {jmax}")
    validate_profile(profile)
    return DyadicPartition(jmin, jmax, profile)


def default_partition(grid: GridSpec, profile: Callable = smooth_step) -> DyadicPartition:
    """Dyadic range covering every nonzero frequency of the grid.

    jmin puts the coarsest annulus just below the fundamental frequency
    2*pi/L; jmax reaches the Nyquist annulus.  A small nudge stabilizes the
    integer cuts when log2 lands within roundoff of an integer.
    """
    fundamental = 2.0 * math.pi / grid.L
    nyquist = math.pi * grid.N / grid.L
    jmin = math.ceil(math.log2(fundamental) - 1e-9) - 1
    jmax = math.floor(math.log2(nyquist) + 1e-9)
    return build_partition(jmin, jmax, profile)


def spectral_tail_fraction(F: SpectrumField, part: DyadicPartition) -> float:
    """Relative spectral energy outside the covered annuli.

    The fraction is measured over nonzero frequencies; the mean mode is
    exempt because every block annihilates grid constants.
    """
    grid = F.grid
    covered = part.covered_mask(grid)
    power = np.abs(F.coeffs) ** 2
    power[(0,) * grid.d] = 0.0
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    outside = float(np.sum(power[~covered]))
    return math.sqrt(outside / total)


def ensure_covered(F: SpectrumField, part: DyadicPartition, tol: float = TAIL_TOL) -> None:
    tail = spectral_tail_fraction(F, part)
    if tail > tol:
        raise PreconditionError(
            f"spectral energy fraction {tail:.3e} outside the covered annuli "
            f"exceeds {tol:g}; enlarge the dyadic range or smooth the field"
        )


def lp_block_spectrum(F: SpectrumField, j: int, part: DyadicPartition) -> SpectrumField:
    if j not in part.js:
        raise DomainError(f"block index {j} outside partition range [{part.jmin}, {part.jmax}]")
    w = F.grid.frequency_norm()
    return F.with_coeffs(F.coeffs * part.eta_j(w, j))


def lp_block(f: Field, j: int, part: DyadicPartition) -> Field:
    """The Littlewood-Paley block M_j f; annihilates grid constants exactly."""
    out = lp_block_spectrum(forward_transform(f), j, part)
    if f.kind == REAL:
        return inverse_transform(out, kind=REAL)
    return inverse_transform(out)


def lp_blocks(f: Field, part: DyadicPartition) -> dict[int, Field]:
    """All blocks from a single forward transform, keyed by j."""
    F = forward_transform(f)
    kind = REAL if f.kind == REAL else None
    w = f.grid.frequency_norm()
    out = {}
    for j in part.js:
        block = F.with_coeffs(F.coeffs * part.eta_j(w, j))
        out[j] = inverse_transform(block, kind=kind) if kind else inverse_transform(block)
    return out


def lp_square_function(f: Field, s: float, part: DyadicPartition) -> Field:
    """Pointwise (sum_j (2^{js} |M_j f|)^2)^(1/2) over the covered range."""
    F = forward_transform(f)
    ensure_covered(F, part)
    w = f.grid.frequency_norm()
    acc = np.zeros(f.grid.shape, dtype=float)
    for j in part.js:
        block = inverse_transform(F.with_coeffs(F.coeffs * part.eta_j(w, j)))
        acc += (2.0 ** (j * s) * np.abs(block.values)) ** 2
    return Field(f.grid, np.sqrt(acc).astype(np.complex128), REAL)


def lp_sobolev_norm(f: Field, s: float, p: float, part: DyadicPartition) -> float:
    """L^p norm of the 2^{js}-weighted square function."""
    return quadrature_lp_norm(lp_square_function(f, s, part), p)


def lp_lipschitz_norm(f: Field, gamma: float, part: DyadicPartition) -> float:
    """sup_j 2^{j gamma} ||M_j f||_inf over the covered range."""
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    F = forward_transform(f)
    ensure_covered(F, part)
    w = f.grid.frequency_norm()
    best = 0.0
    for j in part.js:
        block = inverse_transform(F.with_coeffs(F.coeffs * part.eta_j(w, j)))
        best = max(best, 2.0 ** (j * gamma) * float(np.max(np.abs(block.values))))
    return best


def lp_bmo_norm(f: Field, part: DyadicPartition) -> float:
    """sup over grid points of the unweighted square function."""
    sq = lp_square_function(f, 0.0, part)
    return float(np.max(sq.values.real))
