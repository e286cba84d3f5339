"""Uniform cell-centred box grids, spectral calculus and quadrature.

The 3D substrate is a cube ``[-L, L)^3`` sampled at cell centres, so the
origin is never a sample point for even ``n``.  A companion radial grid
supports the spherically symmetric reduction used by the radial solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import InputDomainError

ProfileFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    """Cubic box of half-width ``half_width`` with ``n`` cells per axis."""

    n: int
    half_width: float

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise InputDomainError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 16 or self.n % 2:
            raise InputDomainError(f"n must be even and >= 16, got {self.n}")
        width = float(self.half_width)
        if not np.isfinite(width) or width <= 0.0:
            raise InputDomainError(f"half_width must be positive, got {self.half_width!r}")
        object.__setattr__(self, "half_width", width)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @cached_property
    def axis(self) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        return -self.half_width + (np.arange(self.n) + 0.5) * self.spacing

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.spacing)

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays ``(x, y, z)``."""
        a = self.axis
        return a[:, None, None], a[None, :, None], a[None, None, :]

    @cached_property
    def radius(self) -> np.ndarray:
        x, y, z = self.mesh()
        return np.sqrt(x * x + y * y + z * z)

    @cached_property
    def k_squared(self) -> np.ndarray:
        k = self.wavenumbers
        return k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2

    @cached_property
    def radial_classes(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct radii of the cell centres and the inverse index map.

        ``x_i = (h/2)(2i+1-n)`` so ``|x|^2`` is ``(h/2)^2`` times an integer;
        grouping on that integer is exact.
        """
        odd = (2 * np.arange(self.n) + 1 - self.n) ** 2
        m = odd[:, None, None] + odd[None, :, None] + odd[None, None, :]
        keys, inverse = np.unique(m.ravel(), return_inverse=True)
        radii = 0.5 * self.spacing * np.sqrt(keys.astype(float))
        return radii, inverse


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable samples of a function on the cell centres of a grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(float)
        if arr.shape != self.spec.shape:
            raise InputDomainError(f"field shape {arr.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputDomainError("field contains non-finite values")
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def is_real(self) -> bool:
        return self.values.dtype.kind == "f"

    def density(self) -> np.ndarray:
        """Pointwise ``|values|^2``."""
        v = self.values
        return v * v if self.is_real else (v.real**2 + v.imag**2)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.spec, values)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "Field":
        return cls(spec, np.zeros(spec.shape))


def integrate(f: Field | np.ndarray, spec: GridSpec | None = None) -> float | complex:
    """Midpoint rule ``h^3 * sum(values)`` over the box."""
    values, spec = _unpack(f, spec)
    total = values.sum() * spec.cell_volume
    return complex(total) if np.iscomplexobj(total) else float(total)


def spectral_gradient(f: Field) -> tuple[Field, Field, Field]:
    """Fourier-multiplier partial derivatives under periodic extension."""
    return tuple(Field(f.spec, g) for g in gradient_values(f.values, f.spec))


def gradient_values(values: np.ndarray, spec: GridSpec) -> list[np.ndarray]:
    real = not np.iscomplexobj(values)
    k = _derivative_wavenumbers(spec)
    transformed = sfft.fftn(values)
    out = []
    for axis in range(3):
        shape = [1, 1, 1]
        shape[axis] = spec.n
        g = sfft.ifftn(transformed * (1j * k.reshape(shape)))
        out.append(g.real if real else g)
    return out


def laplacian_values(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    out = sfft.ifftn(-spec.k_squared * sfft.fftn(values))
    return out if np.iscomplexobj(values) else out.real


def kinetic_integral(values: np.ndarray, spec: GridSpec) -> float:
    """``int |grad u|^2`` evaluated on the Fourier side."""
    coeffs = sfft.fftn(values)
    power = coeffs.real**2 + coeffs.imag**2
    return float(np.sum(spec.k_squared * power) * spec.cell_volume / spec.n**3)


def fourier_norm_squared(f: Field) -> float:
    """Parseval counterpart of ``integrate(|f|^2)``."""
    coeffs = sfft.fftn(f.values)
    return float(np.sum(coeffs.real**2 + coeffs.imag**2) * f.spec.cell_volume / f.spec.n**3)


def invert_helmholtz(values: np.ndarray, spec: GridSpec, shift: float) -> np.ndarray:
    """Apply ``(shift - Laplacian)^{-1}`` spectrally."""
    out = sfft.ifftn(sfft.fftn(values) / (shift + spec.k_squared))
    return out if np.iscomplexobj(values) else out.real


def sample(profile: ProfileFunction, spec: GridSpec, scale: float = 1.0) -> Field:
    """Samples of ``x -> g(x / scale)`` at the cell centres."""
    if not np.isfinite(scale) or scale <= 0.0:
        raise InputDomainError(f"scale must be positive, got {scale!r}")
    x, y, z = spec.mesh()
    values = np.asarray(profile(x / scale, y / scale, z / scale))
    values = np.broadcast_to(values, spec.shape)
    if not np.all(np.isfinite(values)):
        raise InputDomainError("profile produced non-finite samples")
    return Field(spec, values)


def boundary_shell_fraction(f: Field | np.ndarray, spec: GridSpec | None = None) -> float:
    """Fraction of ``int |f|^2`` carried by the region ``|x| > L/2``."""
    values, spec = _unpack(f, spec)
    dens = np.abs(values) ** 2
    total = dens.sum()
    if total == 0.0:
        return 0.0
    return float(dens[spec.radius > 0.5 * spec.half_width].sum() / total)


def interpolation_matrix(spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Matrix evaluating the trigonometric interpolant of one axis at ``points``.

    Rows for points outside ``[-L, L]`` are zero: the decayed state is
    extended by zero instead of periodically.
    """
    points = np.asarray(points, dtype=float)
    n, h = spec.n, spec.spacing
    k = 2.0 * np.pi * sfft.fftfreq(n, d=h)
    offsets = spec.axis - spec.axis[0]
    forward = np.exp(-1j * np.outer(k, offsets)) / n
    phase = np.outer(points - spec.axis[0], k)
    evaluate = np.exp(1j * phase)
    evaluate[:, n // 2] = np.cos(phase[:, n // 2])
    matrix = evaluate @ forward
    matrix[np.abs(points) > spec.half_width] = 0.0
    return matrix


def resample_tensor(values: np.ndarray, spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate the interpolant on the tensor grid ``points^3``."""
    m = interpolation_matrix(spec, points)
    out = np.einsum("ai,ijk->ajk", m, values, optimize=True)
    out = np.einsum("bj,ajk->abk", m, out, optimize=True)
    out = np.einsum("ck,abk->abc", m, out, optimize=True)
    return out if np.iscomplexobj(values) else out.real


def dilate(values: np.ndarray, spec: GridSpec, scale: float) -> np.ndarray:
    """Samples of ``scale^2 u(scale x)`` from samples of ``u``."""
    if scale == 1.0:
        return np.array(values, copy=True)
    return scale**2 * resample_tensor(values, spec, scale * spec.axis)


def transfer(values: np.ndarray, source: GridSpec, target: GridSpec) -> np.ndarray:
    """Spectral transfer of a decayed field between two grids."""
    return resample_tensor(values, source, target.axis)


def _derivative_wavenumbers(spec: GridSpec) -> np.ndarray:
    k = spec.wavenumbers.copy()
    k[spec.n // 2] = 0.0
    return k


def _unpack(f, spec):
    if isinstance(f, Field):
        return f.values, f.spec
    if spec is None:
        raise InputDomainError("a GridSpec is required for raw arrays")
    return np.asarray(f), spec


@dataclass(frozen=True)
class RadialGrid:
    """Interior nodes ``r_j = j*dr`` (``j = 1..N-1``) of ``[0, r_max]``.

    Radial functions are carried as ``w = r*u``, which vanishes at both ends,
    so a type-I sine series gives spectral derivatives.
    """

    intervals: int
    r_max: float

    def __post_init__(self) -> None:
        if self.intervals < 8:
            raise InputDomainError("a radial grid needs at least 8 intervals")
        if not self.r_max > 0.0:
            raise InputDomainError("r_max must be positive")

    @property
    def dr(self) -> float:
        return self.r_max / self.intervals

    @cached_property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.intervals)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.pi * np.arange(1, self.intervals) / self.r_max

    def sine_coefficients(self, w: np.ndarray) -> np.ndarray:
        return sfft.dst(w, type=1) / self.intervals

    def from_sine(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.idst(coeffs * self.intervals, type=1)

    def second_derivative(self, w: np.ndarray) -> np.ndarray:
        return self.from_sine(-(self.wavenumbers**2) * self.sine_coefficients(w))

    def integrate(self, f: np.ndarray) -> float:
        """``int_{R^3} f`` for a radial ``f`` given at the nodes."""
        return float(4.0 * np.pi * self.dr * np.sum(f * self.r**2))

    def evaluate_sine(self, w: np.ndarray, radii: np.ndarray, block: int = 4096) -> np.ndarray:
        """Sine-series interpolant of ``w`` at arbitrary radii in ``[0, r_max]``."""
        coeffs = self.sine_coefficients(w)
        radii = np.asarray(radii, dtype=float)
        flat = radii.ravel()
        out = np.empty_like(flat)
        for start in range(0, flat.size, block):
            chunk = flat[start:start + block]
            out[start:start + block] = np.sin(np.outer(chunk, self.wavenumbers)) @ coeffs
        out[flat > self.r_max] = 0.0
        return out.reshape(radii.shape)
