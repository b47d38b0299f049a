"""Fourier-multiplier operators.

A multiplier is a function of the angular frequency vector omega applied
pointwise to the spectrum of a field.  This module provides the shared
application engine plus the named operators built on it: the fractional
Laplacian |omega|^s, the Riesz potential |omega|^{-s}, the Riesz transforms
-i omega_j / |omega|, and spectral partial derivatives (i omega)^alpha.

Zero-mode policy: every homogeneous symbol of negative degree, and |omega|^s
with s > 0, sends the omega = 0 bin to zero.  This matches the fact that the
continuum operators act on classes modulo polynomials (constants, on the
grid) and annihilate them.  Negative-power multipliers additionally refuse
inputs carrying non-negligible mean, since silently zeroing a massive DC
mode would corrupt the result.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .grid import (
    COMPLEX,
    REAL,
    Field,
    SpectrumField,
    forward_transform,
    inverse_transform,
    l1_grid_norm,
)

ZERO_MODE_SET_ZERO = "set_zero"
ZERO_MODE_KEEP = "keep"
ZERO_MODE_REJECT = "reject_if_massive"

# Relative DC tolerance used by the negative-power multiplier operators.
DC_MASS_TOL = 1e-8


@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier symbol together with its omega = 0 policy.

    symbol receives the tuple of broadcastable angular-frequency component
    arrays and must return the symbol values on the grid.  The symbol is
    evaluated only at grid frequencies.  ``reject_tol`` bounds the admissible
    DC coefficient relative to the grid L^1 norm of the input when the rule
    is ``reject_if_massive``.
    """

    symbol: Callable[..., np.ndarray]
    zero_mode_rule: str = ZERO_MODE_SET_ZERO
    reject_tol: float = DC_MASS_TOL

    def __post_init__(self):
        if self.zero_mode_rule not in (
            ZERO_MODE_SET_ZERO,
            ZERO_MODE_KEEP,
            ZERO_MODE_REJECT,
        ):
            raise DomainError(f"unknown zero-mode rule {self.zero_mode_rule!r}")
        if self.zero_mode_rule == ZERO_MODE_REJECT and not self.reject_tol > 0:
            raise DomainError("reject_if_massive needs a positive tolerance")


def omega_norm(omega) -> np.ndarray:
    """|omega| from the broadcastable component arrays."""
    return np.sqrt(sum(np.square(w) for w in omega))


def power_symbol(s: float):
    """|omega|^s."""

    def sym(omega):
        return omega_norm(omega) ** s

    return sym


def riesz_symbol(axis: int):
    """-i omega_axis / |omega| (axis is 0-based here)."""

    def sym(omega):
        return -1j * omega[axis] / omega_norm(omega)

    return sym


def derivative_symbol(alpha) -> Callable:
    """(i omega)^alpha for a multi-index alpha."""
    alpha = tuple(int(a) for a in alpha)

    def sym(omega):
        out = np.ones(np.broadcast_shapes(*(w.shape for w in omega)), dtype=complex)
        for w, a in zip(omega, alpha):
            if a:
                out = out * (1j * w) ** a
        return out

    return sym


def constant_symbol(c: complex):
    def sym(omega):
        return np.full(np.broadcast_shapes(*(w.shape for w in omega)), c, dtype=complex)

    return sym


def product_symbol(*symbols):
    """Pointwise product of symbols; the multiplier algebra."""

    def sym(omega):
        out = np.asarray(symbols[0](omega), dtype=complex)
        for s in symbols[1:]:
            out = out * s(omega)
        return out

    return sym


def _evaluate_symbol(spec: MultiplierSpec, grid) -> np.ndarray:
    omega = tuple(grid.frequencies())
    with np.errstate(all="ignore"):
        values = np.asarray(spec.symbol(omega), dtype=np.complex128)
    values = np.broadcast_to(values, grid.shape).copy()
    dc_index = (0,) * grid.d
    if spec.zero_mode_rule in (ZERO_MODE_SET_ZERO, ZERO_MODE_REJECT):
        values[dc_index] = 0.0
    if not np.all(np.isfinite(values)):
        raise DomainError("symbol produced non-finite values away from omega = 0")
    return values


def _is_hermitian_symmetric(values: np.ndarray, grid) -> bool:
    """Check S(-omega) == conj(S(omega)) on the grid."""
    idx = [(grid.N - np.arange(grid.N)) % grid.N] * grid.d
    reflected = values[np.ix_(*idx)]
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(reflected - np.conj(values))) <= 1e-12 * scale)


def apply_multiplier_to_spectrum(F: SpectrumField, spec: MultiplierSpec) -> SpectrumField:
    values = _evaluate_symbol(spec, F.grid)
    return F.with_coeffs(values * F.coeffs)


def apply_multiplier(f: Field, spec: MultiplierSpec) -> Field:
    """Apply a Fourier multiplier to a field.

    Real input and a Hermitian-symmetric symbol yield a real-kind output.
    """
    F = forward_transform(f)
    if spec.zero_mode_rule == ZERO_MODE_REJECT:
        dc = abs(F.dc())
        bound = spec.reject_tol * l1_grid_norm(f)
        if dc > bound:
            raise PreconditionError(
                f"DC coefficient magnitude {dc:.6e} exceeds "
                f"{spec.reject_tol:g} * grid-L1 norm = {bound:.6e}"
            )
    values = _evaluate_symbol(spec, f.grid)
    out = F.with_coeffs(values * F.coeffs)
    if f.kind == REAL and _is_hermitian_symmetric(values, f.grid):
        return inverse_transform(out, kind=REAL)
    return inverse_transform(out)


def _require_numerically_mean_zero(F: SpectrumField) -> None:
    dc = abs(F.dc())
    scale = float(np.max(np.abs(F.coeffs)))
    if scale > 0 and dc > DC_MASS_TOL * scale:
        raise PreconditionError(
            f"DC coefficient magnitude {dc:.6e} exceeds {DC_MASS_TOL:g} * "
            f"max|coeffs| = {DC_MASS_TOL * scale:.6e}; "
            "project the field onto the moment-free subspace first"
        )


def frac_laplacian(f: Field, s: float) -> Field:
    """Fractional Laplacian: multiplier |omega|^s, s >= 0.

    The omega = 0 bin is sent to zero for s > 0, so grid constants are
    annihilated and the operator depends only on the field modulo constants.
    """
    if s < 0:
        raise DomainError(f"frac_laplacian requires s >= 0 (got {s}); "
                          "use riesz_potential for negative powers")
    if s == 0:
        return f
    return apply_multiplier(f, MultiplierSpec(power_symbol(s), ZERO_MODE_SET_ZERO))


def riesz_potential(f: Field, s: float) -> Field:
    """Riesz potential: multiplier |omega|^{-s}, 0 < s < d.

    Requires a numerically mean-zero field: |DC| <= 1e-8 * max|coeffs|.
    """
    d = f.grid.d
    if not 0 < s < d:
        raise DomainError(f"riesz_potential requires 0 < s < d = {d}, got s = {s}")
    F = forward_transform(f)
    _require_numerically_mean_zero(F)
    spec = MultiplierSpec(power_symbol(-s), ZERO_MODE_SET_ZERO)
    out = apply_multiplier_to_spectrum(F, spec)
    if f.kind == REAL:
        return inverse_transform(out, kind=REAL)
    return inverse_transform(out)


def riesz_transform(f: Field, axis: int) -> Field:
    """Riesz transform along ``axis`` (1-based): multiplier -i omega_j/|omega|.

    In d = 1 this is the Hilbert transform.  Real input yields real output;
    as with odd spectral derivatives, the unpaired Nyquist bin of the
    transform axis is zeroed.
    """
    d = f.grid.d
    if not 1 <= axis <= d:
        raise DomainError(f"axis must be in 1..{d}, got {axis}")
    F = forward_transform(f)
    _require_numerically_mean_zero(F)
    grid = f.grid
    wj = np.broadcast_to(grid.frequencies()[axis - 1], grid.shape)
    with np.errstate(all="ignore"):
        values = -1j * wj / grid.frequency_norm()
    values = np.asarray(values, dtype=complex)
    values[(0,) * d] = 0.0
    kj = np.broadcast_to(grid.integer_wavevectors()[axis - 1], grid.shape)
    values = np.where(kj == -grid.N // 2, 0.0, values)
    out = F.with_coeffs(values * F.coeffs)
    if f.kind == REAL:
        return inverse_transform(out, kind=REAL)
    return inverse_transform(out)


def derivative_weights(grid, alpha) -> np.ndarray:
    """(i omega)^alpha on the frequency grid.

    Odd powers zero the unpaired Nyquist bin of their axis, the standard
    convention that keeps spectral derivatives of real fields real.
    """
    alpha = tuple(int(a) for a in alpha)
    out = np.ones(grid.shape, dtype=complex)
    ks = grid.integer_wavevectors()
    for w, k, a in zip(grid.frequencies(), ks, alpha):
        if not a:
            continue
        wa = (1j * np.broadcast_to(w, grid.shape)) ** a
        if a % 2 == 1:
            wa = np.where(np.broadcast_to(k, grid.shape) == -grid.N // 2, 0.0, wa)
        out = out * wa
    return out


def partial_derivative(f: Field, alpha) -> Field:
    """Spectral partial derivative with symbol (i omega)^alpha."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != f.grid.d or any(a < 0 for a in alpha):
        raise DomainError(f"multi-index {alpha} invalid for dimension {f.grid.d}")
    F = forward_transform(f)
    out = F.with_coeffs(derivative_weights(f.grid, alpha) * F.coeffs)
    if f.kind == REAL:
        return inverse_transform(out, kind=REAL)
    return inverse_transform(out)


def multi_indices(d: int, order: int) -> list[tuple[int, ...]]:
    """Multi-indices with |alpha| == order, in a fixed lexicographic order."""
    if order < 0:
        raise DomainError("order must be nonnegative")
    out = [
        alpha
        for alpha in itertools.product(range(order + 1), repeat=d)
        if sum(alpha) == order
    ]
    return sorted(out)


def multi_indices_up_to(d: int, order: int) -> list[tuple[int, ...]]:
    """Multi-indices with |alpha| <= order, ordered by (|alpha|, alpha)."""
    out = []
    for k in range(order + 1):
        out.extend(multi_indices(d, k))
    return out


def multi_factorial(alpha) -> int:
    return math.prod(math.factorial(int(a)) for a in alpha)
