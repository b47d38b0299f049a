"""Regime classification and the canonical realization operator.

A field is treated as a representative of its class modulo polynomials.
``realize`` maps the class to the canonical representative singled out by
vanishing normalization data at the origin and/or vanishing ball averages;
which data vanish depends on the regime of (s, p, d):

* subcritical (s < d/p): the resummed blocks themselves;
* critical (s - d/p a nonnegative integer m): for m = 0 subtract the ball
  average; for m >= 1 subtract the Taylor data of order <= m-1 at 0 and the
  ball averages of the order-m derivatives;
* supercritical (s > d/p, s - d/p not an integer): subtract the Taylor data
  of order <= m = floor(s - d/p) at 0.

Genuine polynomials do not exist on a periodic grid, so the subtracted
"polynomials" are grid-representable surrogates: smooth windowed monomials
projected onto the covered dyadic band.  Inside the window plateau they
carry exactly the requested Taylor data, they stay spectrally tame, and the
normalization equations are solved exactly, which makes the operator
idempotent to machine precision and invariant under adding windowed
polynomials on the observation region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, StructuralError
from .grid import (
    REAL,
    Field,
    GridSpec,
    SpectrumField,
    ball_average,
    ball_mask,
    forward_transform,
    inverse_transform,
    quadrature_lp_norm,
)
from .littlewood_paley import (
    DyadicPartition,
    default_partition,
    ensure_covered,
    spectral_tail_fraction,
)
from .multipliers import (
    frac_laplacian,
    multi_factorial,
    multi_indices,
    multi_indices_up_to,
)
from .profiles import radial_step

REGIME_SUBCRITICAL = "subcritical"
REGIME_CRITICAL = "critical"
REGIME_SUPERCRITICAL = "supercritical"

# |s - d/p - round(s - d/p)| below this counts as the critical case.
CRITICAL_DETECTION_TOL = 1e-12

# Constraint residuals must stay below this multiple of the field scale.
CONSTRAINT_REL_TOL = 1e-7

# Spectral-tail fraction above which Taylor extraction is refused.
TAYLOR_TAIL_TOL = 1e-8

# Correction-window plateau and support radii, as fractions of the period.
_WINDOW_PLATEAU = 0.30
_WINDOW_SUPPORT = 0.45


@dataclass(frozen=True)
class RegimeParams:
    """(s, p, d) with the derived quantities that steer the realization."""

    s: float
    p: float
    d: int
    m: int
    regime: str
    pstar: float | None = None

    def __post_init__(self):
        if self.regime not in (REGIME_SUBCRITICAL, REGIME_CRITICAL, REGIME_SUPERCRITICAL):
            raise DomainError(f"unknown regime tag {self.regime!r}")


def classify_regime(s: float, p: float, d: int) -> RegimeParams:
    """Classify (s, p, d) and derive m = floor(s - d/p) and p*.

    Critical detection uses the tolerance |s - d/p - round(s - d/p)| < 1e-12.
    """
    if not (isinstance(d, int) and d >= 1):
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    if not (np.isfinite(s) and s > 0):
        raise DomainError(f"smoothness order s must be positive, got {s!r}")
    if not (np.isfinite(p) and 1 < p < math.inf):
        raise DomainError(f"integrability p must lie in (1, inf), got {p!r}")
    t = s - d / p
    nearest = round(t)
    if abs(t - nearest) < CRITICAL_DETECTION_TOL and nearest >= 0:
        return RegimeParams(s, p, d, int(nearest), REGIME_CRITICAL)
    if t < 0:
        pstar = 1.0 / (1.0 / p - s / d)
        return RegimeParams(s, p, d, math.floor(t), REGIME_SUBCRITICAL, pstar)
    return RegimeParams(s, p, d, math.floor(t), REGIME_SUPERCRITICAL)


@dataclass(frozen=True)
class Polynomial:
    """Multi-index-to-coefficient map; evaluation is nested Horner."""

    coeffs: dict
    center: tuple

    def __post_init__(self):
        coeffs = {tuple(int(a) for a in g): complex(c) for g, c in self.coeffs.items()}
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def degree(self) -> int:
        return max((sum(g) for g in self.coeffs), default=0)

    def _dense(self) -> np.ndarray:
        d = len(self.center)
        shape = tuple(
            max((g[axis] for g in self.coeffs), default=0) + 1 for axis in range(d)
        )
        dense = np.zeros(shape, dtype=complex)
        for g, c in self.coeffs.items():
            dense[g] = c
        return dense

    def evaluate(self, *points) -> np.ndarray:
        """Evaluate at broadcastable coordinate arrays, one per axis."""
        d = len(self.center)
        if len(points) != d:
            raise StructuralError(f"need {d} coordinate arrays, got {len(points)}")
        shifted = np.broadcast_arrays(
            *(np.asarray(x) - c for x, c in zip(points, self.center))
        )
        dense = self._dense()
        pv = np.polynomial.polynomial
        if d == 1:
            return pv.polyval(shifted[0], dense)
        if d == 2:
            return pv.polyval2d(shifted[0], shifted[1], dense)
        return pv.polyval3d(shifted[0], shifted[1], shifted[2], dense)

    def eval_on_grid(self, grid: GridSpec) -> np.ndarray:
        return self.evaluate(*np.meshgrid(
            *([grid.axis_coordinates()] * grid.d), indexing="ij", sparse=True))


def _derivative_weights(grid: GridSpec, gamma) -> np.ndarray:
    """(i omega)^gamma on the frequency grid."""
    out = np.ones(grid.shape, dtype=complex)
    for w, a in zip(grid.frequencies(), gamma):
        if a:
            out = out * (1j * np.broadcast_to(w, grid.shape)) ** a
    return out


def _phase_at(grid: GridSpec, x0) -> np.ndarray:
    if all(abs(c) < 1e-300 for c in x0):
        return np.ones(grid.shape)
    phase = np.zeros(grid.shape)
    for w, c in zip(grid.frequencies(), x0):
        phase = phase + np.broadcast_to(w, grid.shape) * c
    return np.exp(1j * phase)


def spectral_taylor_data(F: SpectrumField, orders, x0=None) -> dict:
    """Taylor coefficients d^gamma f(x0) / gamma! from the spectrum.

    Exact for bandlimited fields; ``orders`` is an iterable of multi-indices.
    """
    grid = F.grid
    x0 = (0.0,) * grid.d if x0 is None else tuple(float(c) for c in x0)
    phase = _phase_at(grid, x0)
    scale = 1.0 / grid.L**grid.d
    out = {}
    for gamma in orders:
        gamma = tuple(int(a) for a in gamma)
        weights = _derivative_weights(grid, gamma)
        value = np.sum(F.coeffs * weights * phase) * scale
        out[gamma] = complex(value) / multi_factorial(gamma)
    return out


def _high_band_fraction(F: SpectrumField) -> float:
    grid = F.grid
    k = grid.integer_wavevectors()
    high = np.zeros(grid.shape, dtype=bool)
    for ki in k:
        high |= np.broadcast_to(np.abs(ki) >= grid.N // 4, grid.shape)
    power = np.abs(F.coeffs) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    return math.sqrt(float(np.sum(power[high])) / total)


def taylor_polynomial(f: Field, m: int, x0) -> Polynomial:
    """Degree-m Taylor polynomial of f at the grid point x0.

    Coefficients are extracted spectrally, so f must be numerically smooth
    at the grid scale: the relative spectral energy in the top half of the
    frequency range must not exceed 1e-8.
    """
    if not (isinstance(m, int) and m >= 0):
        raise DomainError(f"Taylor degree must be a nonnegative integer, got {m!r}")
    grid = f.grid
    x0 = tuple(float(c) for c in np.atleast_1d(x0))
    if len(x0) != grid.d:
        raise StructuralError(f"x0 must have {grid.d} components")
    x_axis = grid.axis_coordinates()
    for c in x0:
        if np.min(np.abs(x_axis - c)) > 1e-9 * grid.L:
            raise DomainError(f"x0 component {c} is not a grid sample")
    F = forward_transform(f)
    tail = _high_band_fraction(F)
    if tail > TAYLOR_TAIL_TOL:
        raise PreconditionError(
            f"spectral tail fraction {tail:.3e} exceeds {TAYLOR_TAIL_TOL:g}; "
            "the field is not numerically smooth at the grid scale"
        )
    data = spectral_taylor_data(F, multi_indices_up_to(grid.d, m), x0)
    return Polynomial(data, x0)


class _CorrectionBasis:
    """Covered-band surrogates of the windowed monomials x^gamma / gamma!.

    Each basis member is the windowed monomial with its mean mode and any
    uncovered corner modes removed, so subtracting corrections never leaves
    the band the blocks reproduce exactly.
    """

    def __init__(self, grid: GridSpec, part: DyadicPartition, max_order: int):
        self.grid = grid
        self.gammas = multi_indices_up_to(grid.d, max_order)
        chi = radial_step(grid.radius(), _WINDOW_PLATEAU * grid.L, _WINDOW_SUPPORT * grid.L)
        covered = part.covered_mask(grid)
        coords = grid.coordinates()
        self.values = []
        self.coeffs = []
        for gamma in self.gammas:
            mono = np.ones(grid.shape)
            for x, a in zip(coords, gamma):
                if a:
                    mono = mono * np.broadcast_to(x, grid.shape) ** a
            raw = Field(grid, chi * mono / multi_factorial(gamma), REAL)
            F = forward_transform(raw)
            projected = np.where(covered, F.coeffs, 0.0)
            self.values.append(inverse_transform(
                SpectrumField(grid, projected), kind=REAL).values)
            self.coeffs.append(projected)

    def combination(self, coefficients) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=complex)
        for c, v in zip(coefficients, self.values):
            out = out + c * v
        return out


def _taylor_row(grid: GridSpec, coeffs: np.ndarray, beta) -> complex:
    weights = _derivative_weights(grid, beta)
    return complex(np.sum(coeffs * weights)) / grid.L**grid.d / multi_factorial(beta)


def _ball_avg_derivative(grid, coeffs, alpha, mask) -> complex:
    deriv = inverse_transform(
        SpectrumField(grid, coeffs * _derivative_weights(grid, alpha)))
    return complex(np.sum(deriv.values[mask]) / np.count_nonzero(mask))


def _solve_correction(basis: _CorrectionBasis, rows, targets) -> np.ndarray:
    """Coefficients c with rows(sum_g c_g b_g) = targets; rows are callables."""
    n = len(basis.gammas)
    A = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        for jcol in range(n):
            A[i, jcol] = row(basis.coeffs[jcol])
    return np.linalg.solve(A, np.asarray(targets, dtype=complex))


@dataclass
class BlockDiagnostics:
    j: int
    block_sup: float
    block_lp: float
    taylor: dict


@dataclass
class RealizationDiagnostics:
    """Per-block evidence plus the normalization data removed."""

    regime: str
    ball_center: tuple
    ball_radius: float
    blocks: list  # list[BlockDiagnostics], ascending j
    taylor_removed: dict = field(default_factory=dict)
    final_taylor_removed: dict = field(default_factory=dict)
    ball_averages_removed: dict = field(default_factory=dict)
    statement_ball_average: complex | None = None
    spectral_tail: float = 0.0

    def block_rows(self):
        """Rows (j, block_sup, block_lp, taylor coefficients...)."""
        gammas = sorted({g for b in self.blocks for g in b.taylor})
        header = ["j", "block_sup", "block_lp"] + [
            "t_" + "".join(str(a) for a in g) for g in gammas
        ]
        rows = []
        for b in self.blocks:
            rows.append(
                [b.j, b.block_sup, b.block_lp]
                + [abs(b.taylor.get(g, 0.0)) for g in gammas]
            )
        return header, rows

    def tail_sums(self) -> dict:
        """T_J = sum of block sups with |j| >= J, for decay checks."""
        out = {}
        js = [b.j for b in self.blocks]
        for J in range(0, max(abs(j) for j in js) + 1):
            out[J] = sum(b.block_sup for b in self.blocks if abs(b.j) >= J)
        return out


@dataclass
class RealizationResult:
    field: Field
    diagnostics: RealizationDiagnostics


@dataclass
class ConstraintReport:
    """Residuals of the canonical normalization, one entry per constraint."""

    regime: str
    residuals: dict
    scale: float
    tolerance: float
    membership_norm: float
    extra_norms: dict
    passed: bool

    def rows(self):
        out = [("membership_lp_norm", self.membership_norm, "")]
        for name, value in sorted(self.extra_norms.items()):
            out.append((name, value, ""))
        for name, value in sorted(self.residuals.items()):
            out.append((name, value, "PASS" if value <= self.tolerance else "FAIL"))
        return out


def _default_ball(grid: GridSpec):
    return (0.0,) * grid.d, grid.L / 8


def realize(
    u: Field,
    rp: RegimeParams,
    part: DyadicPartition | None = None,
    ball: tuple | None = None,
) -> RealizationResult:
    """Map a field (a class representative modulo polynomials) to the
    canonical representative of its regime.

    The dyadic blocks are resummed over the partition range; the regime's
    normalization data is then removed through covered-band windowed
    monomials, with the defining equations solved exactly.  Diagnostics
    record per-block norms (convergence evidence), the Taylor data and ball
    averages removed, and the final constraint residuals.
    """
    grid = u.grid
    if rp.d != grid.d:
        raise DomainError(f"regime dimension {rp.d} does not match grid dimension {grid.d}")
    if part is None:
        part = default_partition(grid)
    center, radius = _default_ball(grid) if ball is None else ball
    center = tuple(float(c) for c in np.atleast_1d(center))

    F = forward_transform(u)
    ensure_covered(F, part)
    tail = spectral_tail_fraction(F, part)
    mask = ball_mask(grid, center, radius)
    npts = int(np.count_nonzero(mask))
    if npts < 8:
        raise DomainError(f"ball holds only {npts} grid points (need >= 8)")

    w = grid.frequency_norm()
    taylor_order = max(rp.m, 0)
    gammas_m = multi_indices_up_to(grid.d, taylor_order)

    blocks: dict[int, np.ndarray] = {}
    diag_blocks: list[BlockDiagnostics] = []
    hd = grid.h**grid.d
    for j in part.js:
        coeffs_j = F.coeffs * part.eta_j(w, j)
        block_kind = REAL if u.kind == REAL else None
        spec_j = SpectrumField(grid, coeffs_j)
        if block_kind == REAL:
            vals = inverse_transform(spec_j, kind=REAL).values
        else:
            vals = inverse_transform(spec_j).values
        blocks[j] = vals
        taylor_j = spectral_taylor_data(spec_j, gammas_m)
        sup = float(np.max(np.abs(vals)))
        lp = float((hd * np.sum(np.abs(vals) ** rp.p)) ** (1.0 / rp.p))
        diag_blocks.append(BlockDiagnostics(j, sup, lp, taylor_j))

    g_sum = np.zeros(grid.shape, dtype=np.complex128)
    for j in part.js:
        g_sum = g_sum + blocks[j]
    g_field = Field(grid, g_sum, u.kind)

    diagnostics = RealizationDiagnostics(
        regime=rp.regime,
        ball_center=center,
        ball_radius=radius,
        blocks=diag_blocks,
        spectral_tail=tail,
    )

    if rp.regime == REGIME_SUBCRITICAL:
        out = g_field

    elif rp.regime == REGIME_CRITICAL and rp.m == 0:
        low_consts = {
            b.j: b.taylor[(0,) * grid.d] for b in diag_blocks if b.j <= 0
        }
        partial = g_sum - sum(low_consts.values())
        avg = complex(np.sum(partial[mask]) / npts)
        out = Field(grid, partial - avg, u.kind)
        diagnostics.taylor_removed = {
            (j, (0,) * grid.d): c for j, c in low_consts.items()
        }
        diagnostics.ball_averages_removed = {(0,) * grid.d: avg}

    else:
        basis = _CorrectionBasis(grid, part, taylor_order)
        if rp.regime == REGIME_SUPERCRITICAL:
            totals = [
                sum(b.taylor[g] for b in diag_blocks) for g in basis.gammas
            ]
            rows = [
                (lambda beta: (lambda coeffs: _taylor_row(grid, coeffs, beta)))(g)
                for g in basis.gammas
            ]
            coeffs = _solve_correction(basis, rows, totals)
            out_vals = g_sum - basis.combination(coeffs)
            out = Field(grid, out_vals, u.kind)
            diagnostics.taylor_removed = {
                (b.j, g): b.taylor[g] for b in diag_blocks for g in basis.gammas
            }
        else:
            # Critical with m >= 1: remove the order-m Taylor data of the
            # low blocks, then normalize per the final display: Taylor data
            # up to m-1 at 0 and ball averages of the order-m derivatives.
            low_totals = [
                sum(b.taylor[g] for b in diag_blocks if b.j <= 0)
                for g in basis.gammas
            ]
            rows_taylor = [
                (lambda beta: (lambda coeffs: _taylor_row(grid, coeffs, beta)))(g)
                for g in basis.gammas
            ]
            stage1 = _solve_correction(basis, rows_taylor, low_totals)
            f2 = g_sum - basis.combination(stage1)
            diagnostics.taylor_removed = {
                (b.j, g): b.taylor[g]
                for b in diag_blocks
                if b.j <= 0
                for g in basis.gammas
            }

            F2 = forward_transform(Field(grid, f2, u.kind))
            lower = multi_indices_up_to(grid.d, rp.m - 1)
            top = multi_indices(grid.d, rp.m)
            t_lower = [
                spectral_taylor_data(F2, [g])[g] for g in lower
            ]
            a_top = [
                _ball_avg_derivative(grid, F2.coeffs, a, mask) for a in top
            ]
            rows = [
                (lambda beta: (lambda coeffs: _taylor_row(grid, coeffs, beta)))(g)
                for g in lower
            ] + [
                (lambda alpha: (lambda coeffs: _ball_avg_derivative(grid, coeffs, alpha, mask)))(a)
                for a in top
            ]
            coeffs = _solve_correction(basis, rows, t_lower + a_top)
            out_vals = f2 - basis.combination(coeffs)
            out = Field(grid, out_vals, u.kind)
            diagnostics.final_taylor_removed = dict(zip(lower, t_lower))
            diagnostics.ball_averages_removed = dict(zip(top, a_top))
            diagnostics.statement_ball_average = complex(
                np.sum(f2[mask]) / npts
            )

    if u.kind == REAL:
        out = Field(grid, out.values.real.astype(np.complex128), REAL)
    return RealizationResult(out, diagnostics)


def verify_canonical_constraints(
    f: Field,
    rp: RegimeParams,
    ball: tuple | None = None,
) -> ConstraintReport:
    """Measure the canonical-normalization residuals of a field.

    Always produces a report; ``passed`` is true when every residual is at
    most 1e-7 times the field scale (max |f|).
    """
    grid = f.grid
    if rp.d != grid.d:
        raise DomainError(f"regime dimension {rp.d} does not match grid dimension {grid.d}")
    center, radius = _default_ball(grid) if ball is None else ball
    scale = f.max_abs()
    tol = CONSTRAINT_REL_TOL * (scale if scale > 0 else 1.0)
    F = forward_transform(f)
    residuals: dict[str, float] = {}
    extra: dict[str, float] = {}
    membership = quadrature_lp_norm(frac_laplacian(f, rp.s), rp.p)

    def gamma_name(g):
        return "taylor[" + ",".join(str(a) for a in g) + "]"

    if rp.regime == REGIME_SUBCRITICAL:
        extra["lp_pstar_norm"] = quadrature_lp_norm(f, rp.pstar)
    elif rp.regime == REGIME_CRITICAL and rp.m == 0:
        residuals["ball_average"] = abs(ball_average(f, center, radius))
    elif rp.regime == REGIME_CRITICAL:
        data = spectral_taylor_data(F, multi_indices_up_to(grid.d, rp.m - 1))
        for g, v in data.items():
            residuals[gamma_name(g)] = abs(v)
        mask = ball_mask(grid, center, radius)
        for alpha in multi_indices(grid.d, rp.m):
            residuals[f"ball_average_d{''.join(str(a) for a in alpha)}"] = abs(
                _ball_avg_derivative(grid, F.coeffs, alpha, mask)
            )
    else:
        data = spectral_taylor_data(F, multi_indices_up_to(grid.d, rp.m))
        for g, v in data.items():
            residuals[gamma_name(g)] = abs(v)

    passed = all(v <= tol for v in residuals.values())
    return ConstraintReport(
        regime=rp.regime,
        residuals=residuals,
        scale=scale,
        tolerance=tol,
        membership_norm=membership,
        extra_norms=extra,
        passed=passed,
    )
