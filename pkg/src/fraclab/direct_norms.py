"""Direct-space norm estimators: finite differences, Lipschitz, BMO.

These estimators discretize the suprema in the classical seminorm
definitions by searching explicit finite sampling plans.  They are lower
bounds of the continuum suprema by construction and monotone under plan
refinement; tests assert ratio-boundedness against the spectral estimators
rather than specific constants.

Finite-difference stencils that wrap around the period are flagged and
excluded from the Lipschitz search: the continuum functions live on R^d and
periodic wrap is a discretization artifact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PlanError
from .grid import Field, GridSpec, ball_mask
from .multipliers import multi_indices, partial_derivative


@dataclass(frozen=True)
class DifferenceField:
    """A finite difference together with the wrap flags of its stencils."""

    field: Field
    wrapped: np.ndarray


def finite_difference(f: Field, offset, k: int) -> DifferenceField:
    """Order-k forward difference with increment ``offset`` in grid steps.

    Uses the binomial closed form
    D^k_h f(x) = sum_{j=0..k} (-1)^(k-j) C(k, j) f(x + j h)
    with periodic indexing; ``wrapped`` marks samples whose stencil left the
    fundamental period.
    """
    offset = tuple(int(o) for o in np.atleast_1d(offset))
    if len(offset) != f.grid.d:
        raise DomainError(f"offset must have {f.grid.d} components, got {offset}")
    if all(o == 0 for o in offset):
        raise DomainError("offset must be nonzero")
    if not (isinstance(k, int) and k >= 1):
        raise DomainError(f"difference order must be an integer >= 1, got {k!r}")
    acc = np.zeros(f.grid.shape, dtype=np.complex128)
    axes = tuple(range(f.grid.d))
    for j in range(k + 1):
        shift = tuple(-j * o for o in offset)
        acc += ((-1) ** (k - j) * math.comb(k, j)) * np.roll(f.values, shift, axis=axes)
    wrapped = np.zeros(f.grid.shape, dtype=bool)
    N = f.grid.N
    for axis, o in enumerate(offset):
        if o == 0:
            continue
        idx = np.arange(N).reshape([-1 if a == axis else 1 for a in range(f.grid.d)])
        if o > 0:
            wrapped |= idx + k * o > N - 1
        else:
            wrapped |= idx + k * o < 0
    return DifferenceField(Field(f.grid, acc, f.kind), wrapped)


def finite_difference_recursive(f: Field, offset, k: int) -> DifferenceField:
    """Same operator through the recursion D^k = D(D^(k-1)); cross-check path."""
    if not (isinstance(k, int) and k >= 1):
        raise DomainError(f"difference order must be an integer >= 1, got {k!r}")
    offset = tuple(int(o) for o in np.atleast_1d(offset))
    axes = tuple(range(f.grid.d))
    out = finite_difference(f, offset, 1)
    result, wrapped = out.field, out.wrapped
    for _ in range(k - 1):
        nxt = finite_difference(result, offset, 1)
        shifted = np.roll(wrapped, tuple(-o for o in offset), axis=axes)
        result = nxt.field
        wrapped = wrapped | shifted | nxt.wrapped
    return DifferenceField(result, wrapped)


def _default_directions(d: int) -> tuple[tuple[int, ...], ...]:
    if d == 1:
        return ((1,),)
    if d == 2:
        return ((1, 0), (0, 1), (1, 1), (1, -1))
    return (
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
        (1, 1, 1),
        (1, 1, -1),
        (1, -1, 1),
        (1, -1, -1),
    )


@dataclass(frozen=True)
class DiffSamplingPlan:
    """Increments searched by the Lipschitz estimator.

    Offsets are ``magnitude * direction`` in grid steps; magnitudes form a
    dyadic ladder.  Base points are all grid points whose stencil does not
    wrap.
    """

    magnitudes: tuple[int, ...]
    directions: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.magnitudes or not self.directions:
            raise PlanError("sampling plan must contain magnitudes and directions")
        if any(m < 1 for m in self.magnitudes):
            raise PlanError("magnitudes must be positive integers")
        if any(all(c == 0 for c in direction) for direction in self.directions):
            raise PlanError("directions must be nonzero")

    def offsets(self):
        for direction in self.directions:
            for m in self.magnitudes:
                yield tuple(m * c for c in direction)


def default_diff_plan(grid: GridSpec, max_increment: float | None = None) -> DiffSamplingPlan:
    """Dyadic magnitudes {2^a} capped so |offset| * h stays small.

    The cap keeps the estimator away from window-falloff artifacts when the
    data is compactly supported; the default is L/16.
    """
    if max_increment is None:
        max_increment = grid.L / 16
    directions = _default_directions(grid.d)
    longest = max(math.sqrt(sum(c * c for c in direction)) for direction in directions)
    mags = []
    m = 1
    while m * longest * grid.h <= max_increment and m < grid.N // 2:
        mags.append(m)
        m *= 2
    if not mags:
        raise PlanError(f"max_increment {max_increment} admits no grid increment")
    return DiffSamplingPlan(tuple(mags), directions)


def _real_values(f: Field, who: str) -> np.ndarray:
    scale = f.max_abs()
    if scale > 0 and float(np.max(np.abs(f.values.imag))) > 1e-9 * scale:
        raise DomainError(f"{who} requires a real field")
    return f.values.real


def lipschitz_norm(f: Field, gamma: float, plan: DiffSamplingPlan) -> float:
    """Sampled sup of |D^k_h f(x)| / |h|^gamma with k = floor(gamma) + 1.

    Only interior stencils (no periodic wrap) enter the search; the result
    is a lower bound of the continuum seminorm.
    """
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    _real_values(f, "lipschitz_norm")
    k = math.floor(gamma) + 1
    h = f.grid.h
    best = None
    for offset in plan.offsets():
        diff = finite_difference(f, offset, k)
        valid = ~diff.wrapped
        if not np.any(valid):
            continue
        step = h * math.sqrt(sum(o * o for o in offset))
        value = float(np.max(np.abs(diff.field.values.real[valid]))) / step**gamma
        best = value if best is None else max(best, value)
    if best is None:
        raise PlanError("no interior stencil available; plan is empty on this grid")
    return best


@dataclass(frozen=True)
class BallSamplingPlan:
    """Balls searched by the BMO estimator: centers x radii, all inside the period."""

    centers: tuple[tuple[float, ...], ...]
    radii: tuple[float, ...]

    def __post_init__(self):
        if not self.centers or not self.radii:
            raise PlanError("ball plan must contain centers and radii")


def make_ball_plan(
    grid: GridSpec,
    center_stride: int = 0,
    r0: float | None = None,
    rho: float = 2.0,
    count: int = 4,
) -> BallSamplingPlan:
    """Geometric radii r_i = r0 * rho^i with strided grid-point centers.

    ``center_stride = 0`` picks a stride of N/8.  Centers whose largest ball
    would leave the fundamental period are dropped.
    """
    if not 1.0 < rho <= 2.0:
        raise PlanError(f"radius ratio must lie in (1, 2], got {rho}")
    if count < 1:
        raise PlanError("need at least one radius")
    if r0 is None:
        r0 = max(4 * grid.h, grid.L / 32)
    if r0 < 2 * grid.h:
        raise PlanError(f"smallest radius {r0} is below 2h = {2 * grid.h}")
    radii = tuple(r0 * rho**i for i in range(count))
    if radii[-1] > grid.L / 4:
        raise PlanError(f"largest radius {radii[-1]} exceeds L/4 = {grid.L / 4}")
    stride = center_stride if center_stride else grid.N // 8
    axis = grid.axis_coordinates()[::stride]
    rmax = radii[-1]
    keep = [float(c) for c in axis if abs(c) + rmax <= grid.L / 2]
    centers = []
    for idx in np.ndindex(*([len(keep)] * grid.d)):
        centers.append(tuple(keep[i] for i in idx))
    if not centers:
        raise PlanError("no admissible ball centers on this grid")
    return BallSamplingPlan(tuple(centers), radii)


def bmo_norm(f: Field, plan: BallSamplingPlan) -> float:
    """Sampled sup over plan balls of the mean oscillation of f.

    Ball averages use grid quadrature over {y : |y - x| <= r}; each ball
    must contain at least 8 grid points.
    """
    values = _real_values(f, "bmo_norm")
    best = 0.0
    for center in plan.centers:
        for r in plan.radii:
            mask = ball_mask(f.grid, center, r)
            n = int(np.count_nonzero(mask))
            if n < 8:
                raise PlanError(
                    f"ball(center={center}, r={r}) contains only {n} grid points"
                )
            sample = values[mask]
            mean = float(np.sum(sample)) / n
            best = max(best, float(np.sum(np.abs(sample - mean))) / n)
    return best


def sobolev_bmo_norm(f: Field, m: int, plan: BallSamplingPlan) -> float:
    """sum over |alpha| = m of the BMO estimate of the spectral derivative."""
    if not (isinstance(m, int) and m >= 1):
        raise DomainError(f"derivative order must be an integer >= 1, got {m!r}")
    total = 0.0
    for alpha in multi_indices(f.grid.d, m):
        total += bmo_norm(partial_derivative(f, alpha), plan)
    return total
