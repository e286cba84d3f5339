"""Free-space Coulomb potentials on the box grid and on radial grids.

Every potential is ``(1/(8 pi |x|)) * source``, i.e. the decaying solution
of ``-Laplacian V = source / 2``.  The 3D solver convolves with the kernel on
a zero-padded grid of twice the box width, so no periodic images occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .doping import BallUnion, RadialProfile, UnsupportedProfileError
from .errors import InputDomainError
from .grid import Field, GridSpec, RadialGrid, integrate

# Integral of 1/|x| over the unit cube centred at the origin.
UNIT_CUBE_INVERSE_DISTANCE = 3.0 * math.log(2.0 + math.sqrt(3.0)) - math.pi / 2.0


@dataclass(frozen=True, eq=False)
class CoulombKernel:
    """Transformed kernel samples on the doubled grid (real, even in each axis)."""

    spec: GridSpec
    transform: np.ndarray
    method: str

    def apply(self, source: np.ndarray) -> np.ndarray:
        """Aperiodic convolution restricted to the original box.

        Transforms are pruned so the zero half of the padded array is never
        processed.
        """
        n = self.spec.n
        a = sfft.rfft(np.asarray(source, dtype=float), n=2 * n, axis=2)
        a = sfft.fft(a, n=2 * n, axis=1)
        a = sfft.fft(a, n=2 * n, axis=0)
        a *= self.transform
        a = sfft.ifft(a, axis=0)[:n]
        a = sfft.ifft(a, axis=1)[:, :n]
        return sfft.irfft(a, n=2 * n, axis=2)[:, :, :n]


def _doubled_offsets(n: int) -> np.ndarray:
    """Absolute lattice offsets ``|j|`` in circular order on a ``2n`` grid."""
    return np.r_[0:n, n:0:-1]


def _spectral_kernel_octant(spec: GridSpec) -> np.ndarray:
    """Real-space samples of the kernel truncated at the box diameter.

    The truncated kernel has the smooth transform ``sin^2(R k / 2) / k^2``
    (times 1/2 for the 1/(8 pi) normalisation); sampling it on a fourfold
    period and inverting with a type-I cosine transform yields the kernel at
    every lattice offset that a box-to-box interaction can reach.
    """
    n, h = spec.n, spec.spacing
    period_points = 4 * n
    dk = 2.0 * np.pi / (period_points * h)
    reach = math.sqrt(3.0) * 2.0 * spec.half_width
    k1 = dk * np.arange(2 * n + 1)
    k2 = k1[:, None, None] ** 2 + k1[None, :, None] ** 2 + k1[None, None, :] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ghat = np.sin(0.5 * reach * np.sqrt(k2)) ** 2 / k2
    ghat[0, 0, 0] = reach**2 / 4.0
    del k2
    octant = sfft.dctn(ghat, type=1, overwrite_x=True)
    octant = octant[: n + 1, : n + 1, : n + 1] / (period_points * h) ** 3
    return octant


def _hockney_kernel_octant(spec: GridSpec) -> np.ndarray:
    n, h = spec.n, spec.spacing
    d = h * np.arange(n + 1)
    r = np.sqrt(d[:, None, None] ** 2 + d[None, :, None] ** 2 + d[None, None, :] ** 2)
    with np.errstate(divide="ignore"):
        kernel = 1.0 / (8.0 * np.pi * r)
    kernel[0, 0, 0] = UNIT_CUBE_INVERSE_DISTANCE / (8.0 * np.pi * h)
    return kernel


@lru_cache(maxsize=4)
def coulomb_kernel(spec: GridSpec, method: str = "spectral") -> CoulombKernel:
    """Kernel for ``spec``; ``method`` is ``"spectral"`` or ``"hockney"``."""
    if method == "spectral":
        octant = _spectral_kernel_octant(spec)
    elif method == "hockney":
        octant = _hockney_kernel_octant(spec)
    else:
        raise InputDomainError(f"unknown kernel method {method!r}")
    idx = _doubled_offsets(spec.n)
    full = octant[np.ix_(idx, idx, idx)]
    del octant
    transform = sfft.rfftn(full).real * spec.cell_volume
    return CoulombKernel(spec, transform, method)


def coulomb_values(source: np.ndarray, spec: GridSpec, method: str = "spectral") -> np.ndarray:
    return coulomb_kernel(spec, method).apply(source)


def solve_coulomb(source: Field, method: str = "spectral") -> Field:
    """Free-space potential ``(1/(8 pi |x|)) * source`` of a real source."""
    values = source.values
    if np.iscomplexobj(values):
        if np.any(values.imag != 0.0):
            raise InputDomainError("Coulomb source must be real")
        values = values.real
    return Field(source.spec, coulomb_values(values, source.spec, method))


@dataclass(frozen=True, eq=False)
class Potentials:
    S0: Field
    S1: Field
    S2: Field | None
    S3: Field | None


@lru_cache(maxsize=8)
def profile_potentials(profile, spec: GridSpec, route: str = "exact") -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Grid samples of ``S1, S2, S3`` for a profile.

    ``route="exact"`` evaluates the free-space potentials of the full
    profile in closed form; ``route="grid"`` solves for the box-truncated
    samples with the 3D kernel.  Ball unions always use the exact ball
    potential and have no ``S2``/``S3``.
    """
    if isinstance(profile, BallUnion):
        x, y, z = spec.mesh()
        S1 = -profile.coulomb(x, y, z)
        return _frozen(np.broadcast_to(S1, spec.shape).copy()), None, None
    if not isinstance(profile, RadialProfile):
        raise UnsupportedProfileError(f"unsupported profile {profile!r}")
    if route == "exact":
        radii, inverse = spec.radial_classes
        out = []
        for func in (profile.coulomb, profile.coulomb_of_dilation, profile.coulomb_of_hessian):
            out.append(func(radii)[inverse].reshape(spec.shape))
        S1, S2, S3 = -out[0], out[1], out[2]
    elif route == "grid":
        r = spec.radius
        S1 = -coulomb_values(profile.radial(r), spec)
        S2 = coulomb_values(profile.dilation(r), spec)
        S3 = coulomb_values(profile.hessian(r), spec)
    else:
        raise InputDomainError(f"unknown potential route {route!r}")
    return _frozen(S1), _frozen(S2), _frozen(S3)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def potentials(u: Field, profile, route: str = "exact", derivatives: bool = True) -> Potentials:
    """``S0(u)``, ``S1 = -K*rho``, ``S2 = K*(x.grad rho)``, ``S3 = K*(x.D^2rho x)``."""
    if derivatives and isinstance(profile, BallUnion):
        raise UnsupportedProfileError("S2/S3 of a ball union use the surface forms instead")
    S0 = Field(u.spec, coulomb_values(u.density(), u.spec))
    S1, S2, S3 = profile_potentials(profile, u.spec, route)
    wrap = (lambda a: None if a is None or not derivatives else Field(u.spec, a))
    return Potentials(S0, Field(u.spec, S1), wrap(S2), wrap(S3))


def grad_energy_identity(
    u: Field, radial_nodes: int = 48, polar_nodes: int = 32, azimuth_nodes: int = 64
) -> tuple[float, float]:
    """``(int |grad S0|^2, (1/2) int S0 |u|^2)`` by two independent routes.

    The left side is evaluated in Fourier space, where ``grad S0`` has the
    transform ``i k q^(k) / (2 |k|^2)`` for ``q = |u|^2``.  In spherical
    coordinates the Jacobian cancels the ``1/|k|^2`` singularity, leaving
    ``(1/4)(2 pi)^{-3} int_0^K dk int_{S^2} |q^(k w)|^2 dw`` which is computed
    with Gauss rules and a direct non-uniform Fourier sum of the samples.
    """
    spec = u.spec
    q = u.density()
    rhs = 0.5 * integrate(coulomb_values(q, spec) * q, spec)
    if not np.any(q):
        return 0.0, 0.0
    k_max = math.pi / spec.spacing
    t, wt = np.polynomial.legendre.leggauss(radial_nodes)
    k = 0.5 * k_max * (t + 1.0)
    wk = 0.5 * k_max * wt
    c, wc = np.polynomial.legendre.leggauss(polar_nodes)
    s = np.sqrt(1.0 - c * c)
    phi = 2.0 * np.pi * np.arange(azimuth_nodes) / azimuth_nodes
    wphi = 2.0 * np.pi / azimuth_nodes
    x = spec.axis
    n = spec.n
    kz = np.outer(k, c).ravel()
    kr = np.outer(k, s).ravel()
    weight = np.outer(wk, wc).ravel() * wphi
    # Contract z, then y, then x; each stage is a batched matrix product.
    ez = np.exp(-1j * np.outer(x, kz))
    stage = (q.reshape(n * n, n) @ ez).reshape(n, n, -1)
    total = 0.0
    for j in range(kz.size):
        kx = kr[j] * np.cos(phi)
        ky = kr[j] * np.sin(phi)
        ey = np.exp(-1j * np.outer(x, ky))
        ex = np.exp(-1j * np.outer(x, kx))
        partial = stage[:, :, j] @ ey
        amplitude = np.einsum("ap,ap->p", ex, partial)
        total += weight[j] * float(np.sum(np.abs(amplitude) ** 2))
    lhs = 0.25 * total * spec.cell_volume**2 / (2.0 * np.pi) ** 3
    return float(lhs), float(rhs)


def radial_coulomb(grid: RadialGrid, density: np.ndarray) -> np.ndarray:
    """Radial free-space potential ``(1/2)[(1/r) int_0^r f s^2 + int_r^inf f s]``.

    Solves ``(r V)'' = -r f / 2`` with a sine series; the outer boundary
    value ``r V = (1/2) int_0^R f s^2`` is exact once ``f`` has decayed.
    """
    f = np.asarray(density, dtype=float)
    r = grid.r
    charge = 0.5 * grid.dr * float(np.sum(f * r * r))
    z = grid.from_sine(grid.sine_coefficients(0.5 * r * f) / grid.wavenumbers**2)
    return (z + charge * r / grid.r_max) / r


def radial_coulomb_origin(grid: RadialGrid, density: np.ndarray) -> float:
    """Value of ``radial_coulomb`` at ``r = 0``: ``(1/2) int_0^inf f s ds``.

    Taken as ``(r V)'(0)`` from the same sine series, which keeps spectral
    accuracy where a direct quadrature of the odd integrand would not.
    """
    f = np.asarray(density, dtype=float)
    r = grid.r
    charge = 0.5 * grid.dr * float(np.sum(f * r * r))
    coeffs = grid.sine_coefficients(0.5 * r * f) / grid.wavenumbers**2
    return float(np.sum(coeffs * grid.wavenumbers) + charge / grid.r_max)
