"""Periodic grids, sampled fields, and the discrete Fourier contract.

Everything in this package operates on real- or complex-valued functions
sampled on a uniform periodic grid over the centered box [-L/2, L/2)^d.
The Fourier convention is angular frequency,

    F(omega_k) = h^d * sum_x f(x) * exp(-i x . omega_k),   omega_k = 2*pi*k/L,

so the derivative along axis i has symbol i*omega_i and the (positive)
Laplacian has symbol |omega|^2.  The grid center x = 0 is always a sample
point, which lets pointwise normalizations at the origin read an actual
sample.

Reductions (sums, maxima) are performed in a fixed order through numpy's
deterministic pairwise kernels, so repeated runs on the same machine are
bit-reproducible.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PlanError, StructuralError

REAL = "real"
COMPLEX = "complex"

# A field flagged real may carry at most this much relative imaginary noise.
_REAL_IMAG_TOL = 1e-10

_FLD1_MAGIC = b"HOMSOBF1"


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid over [-L/2, L/2)^d.

    Parameters
    ----------
    d : int
        Dimension, 1 to 3.
    L : float
        Period per axis, in the same units as x.
    N : int
        Samples per axis; must be a power of two, at least 8.
    """

    d: int
    L: float
    N: int

    def __post_init__(self):
        if not isinstance(self.d, int) or not 1 <= self.d <= 3:
            raise DomainError(f"dimension must be an integer in 1..3, got {self.d!r}")
        if not (isinstance(self.N, int) and self.N >= 8 and self.N & (self.N - 1) == 0):
            raise DomainError(f"N must be a power of two >= 8, got {self.N!r}")
        if not (isinstance(self.L, (int, float)) and math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"period L must be a positive finite real, got {self.L!r}")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        """Grid spacing L/N."""
        return self.L / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def npoints(self) -> int:
        return self.N**self.d

    def axis_coordinates(self) -> np.ndarray:
        """Sample locations along one axis: x_k = -L/2 + k*h."""
        return -self.L / 2 + self.h * np.arange(self.N)

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        x = self.axis_coordinates()
        return list(np.meshgrid(*([x] * self.d), indexing="ij", sparse=True))

    def radius(self) -> np.ndarray:
        """|x| on the full grid."""
        r2 = sum(np.square(c) for c in self.coordinates())
        return np.sqrt(r2)

    def axis_frequencies(self) -> np.ndarray:
        """Angular frequencies along one axis in FFT order: omega = 2*pi*k/L."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def frequencies(self) -> list[np.ndarray]:
        """Broadcastable angular-frequency arrays, one per axis, FFT order."""
        w = self.axis_frequencies()
        return list(np.meshgrid(*([w] * self.d), indexing="ij", sparse=True))

    def frequency_norm(self) -> np.ndarray:
        """|omega| on the full frequency grid, FFT order."""
        w2 = sum(np.square(w) for w in self.frequencies())
        return np.sqrt(w2)

    def integer_wavevectors(self) -> list[np.ndarray]:
        """Integer frequency indices k in {-N/2..N/2-1}, FFT order, per axis."""
        k = np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)
        return list(np.meshgrid(*([k] * self.d), indexing="ij", sparse=True))

    def dilate(self, factor: int) -> "GridSpec":
        """Grid with the period rescaled by ``factor`` (samples unchanged).

        Reinterpreting a Field's values on ``grid.dilate(2)`` realizes the
        exact dyadic dilation x -> x/2 without resampling.
        """
        if factor <= 0:
            raise DomainError("dilation factor must be positive")
        return GridSpec(self.d, self.L * factor, self.N)


def _alternating_signs(grid: GridSpec) -> np.ndarray:
    """(-1)^(k_1+...+k_d) in FFT order; the half-period phase shift."""
    s = np.ones(grid.N)
    s[1::2] = -1.0
    out = s
    for _ in range(grid.d - 1):
        out = np.multiply.outer(out, s)
    return out


@dataclass(frozen=True)
class Field:
    """A function sampled on a periodic grid.

    values are stored as complex128 in row-major multi-index order; ``kind``
    records whether the field is semantically real.  Real-kind fields must
    satisfy max|Im| <= 1e-10 * max|value|.
    """

    grid: GridSpec
    values: np.ndarray
    kind: str = REAL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise StructuralError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if self.kind not in (REAL, COMPLEX):
            raise StructuralError(f"unknown field kind {self.kind!r}")
        if self.kind == REAL and v.size:
            scale = float(np.max(np.abs(v)))
            if scale > 0 and float(np.max(np.abs(v.imag))) > _REAL_IMAG_TOL * scale:
                raise StructuralError(
                    "field flagged real carries a non-negligible imaginary part"
                )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def real_values(self) -> np.ndarray:
        return self.values.real

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        kind = REAL if self.kind == REAL and other.kind == REAL else COMPLEX
        return Field(self.grid, self.values + other.values, kind)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        kind = REAL if self.kind == REAL and other.kind == REAL else COMPLEX
        return Field(self.grid, self.values - other.values, kind)

    def __mul__(self, c) -> "Field":
        kind = self.kind if not isinstance(c, complex) or c.imag == 0 else COMPLEX
        return Field(self.grid, self.values * c, kind)

    __rmul__ = __mul__

    def shift_by(self, c) -> "Field":
        """Field plus a constant."""
        kind = self.kind if not isinstance(c, complex) or c.imag == 0 else COMPLEX
        return Field(self.grid, self.values + c, kind)

    def reinterpret(self, grid: GridSpec) -> "Field":
        """Same samples viewed on another grid (exact dyadic dilations)."""
        if grid.d != self.grid.d or grid.N != self.grid.N:
            raise StructuralError("reinterpretation requires identical d and N")
        return Field(grid, self.values, self.kind)


def _check_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a != b:
        raise StructuralError(f"grid mismatch: {a} vs {b}")


def field_from_values(grid: GridSpec, values) -> Field:
    """Build a Field, flagging it real when the imaginary part is noise."""
    v = np.asarray(values, dtype=np.complex128)
    if v.shape != grid.shape:
        raise StructuralError(f"values shape {v.shape} does not match grid {grid.shape}")
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    if scale == 0.0 or float(np.max(np.abs(v.imag))) <= _REAL_IMAG_TOL * scale:
        return Field(grid, v, REAL)
    return Field(grid, v, COMPLEX)


def zero_field(grid: GridSpec) -> Field:
    return Field(grid, np.zeros(grid.shape, dtype=np.complex128), REAL)


@dataclass(frozen=True)
class SpectrumField:
    """Discrete Fourier coefficients of a Field.

    coeffs live in numpy FFT order and are indexed by integer wavevectors
    k in {-N/2..N/2-1}^d; the physical frequency of bin k is 2*pi*k/L per
    axis.  The convention marker records the angular-frequency contract.
    """

    grid: GridSpec
    coeffs: np.ndarray
    convention: str = field(default="angular")

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise StructuralError(
                f"coeffs shape {c.shape} does not match grid shape {self.grid.shape}"
            )
        if self.convention != "angular":
            raise StructuralError(f"unsupported convention {self.convention!r}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def coeff_at(self, k) -> complex:
        """Coefficient of the integer wavevector k (per-axis -N/2..N/2-1)."""
        k = np.atleast_1d(np.asarray(k, dtype=int))
        if k.shape != (self.grid.d,):
            raise StructuralError(f"wavevector must have {self.grid.d} components")
        if np.any(k < -self.grid.N // 2) or np.any(k > self.grid.N // 2 - 1):
            raise DomainError(f"wavevector {tuple(k)} outside representable range")
        return complex(self.coeffs[tuple(int(ki) % self.grid.N for ki in k)])

    def dc(self) -> complex:
        return complex(self.coeffs[(0,) * self.grid.d])

    def with_coeffs(self, coeffs) -> "SpectrumField":
        return SpectrumField(self.grid, coeffs, self.convention)


def forward_transform(f: Field) -> SpectrumField:
    """Discrete approximation of F(omega_k) = integral f(x) e^{-i x.omega_k} dx.

    Implemented as the FFT scaled by h^d with the half-period phase shift
    applied, so the x-origin is the grid center.
    """
    grid = f.grid
    signs = _alternating_signs(grid)
    coeffs = np.fft.fftn(f.values) * (grid.h**grid.d) * signs
    return SpectrumField(grid, coeffs)


def inverse_transform(F: SpectrumField, kind: str | None = None) -> Field:
    """Exact inverse of :func:`forward_transform` up to roundoff.

    When ``kind`` is None the result is flagged real if its imaginary part
    is at roundoff level.  Passing ``kind=REAL`` asserts that the spectrum
    is Hermitian-symmetric, so the imaginary residue is transform roundoff
    and is discarded.
    """
    grid = F.grid
    signs = _alternating_signs(grid)
    values = np.fft.ifftn(F.coeffs * signs) / (grid.h**grid.d)
    if kind is None:
        return field_from_values(grid, values)
    if kind == REAL:
        values = values.real.astype(np.complex128)
    return Field(grid, values, kind)


def quadrature_lp_norm(f: Field, p: float) -> float:
    """Grid L^p norm: (h^d sum |f|^p)^(1/p); max|f| for p = inf."""
    if p != math.inf and not (isinstance(p, (int, float)) and p > 0):
        raise DomainError(f"L^p norm requires p > 0 or p = inf, got {p!r}")
    a = np.abs(f.values)
    if p == math.inf:
        return float(np.max(a))
    hd = f.grid.h**f.grid.d
    return float((hd * np.sum(a**p)) ** (1.0 / p))


def l1_grid_norm(f: Field) -> float:
    return quadrature_lp_norm(f, 1.0)


def ball_mask(grid: GridSpec, center, radius: float) -> np.ndarray:
    """Boolean mask of grid points with |x - center| <= radius.

    The ball must lie inside the fundamental period; wrap-around is not
    permitted.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (grid.d,):
        raise StructuralError(f"ball center must have {grid.d} components")
    if radius <= 0:
        raise DomainError("ball radius must be positive")
    if np.any(np.abs(center) + radius > grid.L / 2):
        raise DomainError(
            f"ball(center={tuple(center)}, r={radius}) leaves the fundamental period"
        )
    r2 = sum(np.square(c - ci) for c, ci in zip(grid.coordinates(), center))
    return np.asarray(r2 <= radius**2)


def ball_average(f: Field, center, radius: float, min_points: int = 8) -> complex:
    """Grid-quadrature average of f over the ball |x - center| <= radius."""
    mask = ball_mask(f.grid, center, radius)
    n = int(np.count_nonzero(mask))
    if n < min_points:
        raise PlanError(
            f"ball(center={tuple(np.atleast_1d(center))}, r={radius}) "
            f"contains only {n} grid points (need >= {min_points})"
        )
    return complex(np.sum(f.values[mask]) / n)


def write_field(f: Field, path) -> None:
    """Serialize a Field in the FLD1 container.

    Layout: 8-byte magic ``HOMSOBF1``; little-endian u32 d, u32 N, f64 L,
    u8 kind (0 real, 1 complex); then N^d complex values as interleaved
    little-endian f64 (re, im) in row-major order.
    """
    kind_byte = 0 if f.kind == REAL else 1
    header = _FLD1_MAGIC + struct.pack("<IIdB", f.grid.d, f.grid.N, f.grid.L, kind_byte)
    payload = np.ascontiguousarray(f.values).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_field(path) -> Field:
    """Read a Field from an FLD1 container; rejects unknown magic."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(_FLD1_MAGIC) + struct.calcsize("<IIdB"):
        raise StructuralError("truncated field file")
    if raw[: len(_FLD1_MAGIC)] != _FLD1_MAGIC:
        raise StructuralError("unknown magic; not an FLD1 field file")
    d, N, L, kind_byte = struct.unpack_from("<IIdB", raw, len(_FLD1_MAGIC))
    if kind_byte not in (0, 1):
        raise StructuralError(f"unknown kind byte {kind_byte}")
    grid = GridSpec(int(d), float(L), int(N))
    offset = len(_FLD1_MAGIC) + struct.calcsize("<IIdB")
    expected = grid.npoints * 16
    if len(raw) - offset != expected:
        raise StructuralError(
            f"payload holds {len(raw) - offset} bytes, expected {expected}"
        )
    values = np.frombuffer(raw, dtype="<c16", offset=offset).reshape(grid.shape)
    return Field(grid, values.astype(np.complex128), REAL if kind_byte == 0 else COMPLEX)
