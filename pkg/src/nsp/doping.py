"""Doping profiles, their exact Coulomb potentials and ball geometry.

Coulomb potentials here always mean convolution with ``1/(8 pi |x|)``.
For a radial density ``f`` with ``Q(r) = int_0^r f s^2 ds`` and
``T(r) = int_r^inf f s ds`` that potential is ``(Q(r)/r + T(r)) / 2``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate as sci_integrate, optimize, special

from .errors import InputDomainError, UnsupportedProfileError
from .grid import Field
from .quadrature import FieldInterpolator, sphere_points


class RadialProfile(ABC):
    """Smooth, nonnegative, radially symmetric doping density."""

    kind: str = "radial"
    smooth = True

    @abstractmethod
    def radial(self, r: np.ndarray) -> np.ndarray:
        """Density as a function of ``|x|``."""

    @abstractmethod
    def dilation(self, r: np.ndarray) -> np.ndarray:
        """``x . grad rho`` (equals ``r rho'(r)``)."""

    @abstractmethod
    def hessian(self, r: np.ndarray) -> np.ndarray:
        """``x . (D^2 rho x)`` (equals ``r^2 rho''(r)``)."""

    @abstractmethod
    def enclosed(self, r: np.ndarray) -> np.ndarray:
        """``int_0^r rho(s) s^2 ds``."""

    @abstractmethod
    def outer(self, r: np.ndarray) -> np.ndarray:
        """``int_r^inf rho(s) s ds``."""

    def __call__(self, x, y, z) -> np.ndarray:
        return self.radial(np.sqrt(x * x + y * y + z * z))

    def coulomb(self, r: np.ndarray) -> np.ndarray:
        """Free-space potential of ``rho``; ``S_1 = -coulomb``."""
        r = np.asarray(r, dtype=float)
        return 0.5 * (_safe_ratio(self.enclosed(r), r) + self.outer(r))

    def coulomb_of_dilation(self, r: np.ndarray) -> np.ndarray:
        """Potential of ``x . grad rho``, i.e. ``(r d/dr - 2)`` of the potential."""
        r = np.asarray(r, dtype=float)
        return -0.5 * _safe_ratio(self.enclosed(r), r) - 2.0 * self.coulomb(r)

    def coulomb_of_hessian(self, r: np.ndarray) -> np.ndarray:
        """Potential of ``x . D^2 rho x``, i.e. ``(r d/dr - 2)(r d/dr - 3)`` of the potential."""
        r = np.asarray(r, dtype=float)
        q_over_r = _safe_ratio(self.enclosed(r), r)
        return 6.0 * self.coulomb(r) + 3.0 * q_over_r - 0.5 * r * r * self.radial(r)

    def self_energy(self) -> float:
        """``F = (1/4) int rho * coulomb(rho)``; independent of the state."""
        def integrand(r):
            return float(self.coulomb(np.array([r]))[0] * self.radial(np.array([r]))[0] * r * r)

        value, _ = sci_integrate.quad(integrand, 0.0, np.inf, limit=400)
        return float(np.pi * value)


def _safe_ratio(num: np.ndarray, r: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0.0, num / np.where(r > 0.0, r, 1.0), 0.0)
    return out


@dataclass(frozen=True)
class ZeroProfile(RadialProfile):
    """The undoped case ``rho = 0``."""

    kind = "zero"

    def radial(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    dilation = hessian = enclosed = outer = radial

    def self_energy(self) -> float:
        return 0.0


@dataclass(frozen=True)
class GaussianProfile(RadialProfile):
    """``rho = eps * exp(-alpha |x|^2)``."""

    eps: float
    alpha: float
    kind = "gaussian"

    def __post_init__(self):
        if not (self.eps > 0 and self.alpha > 0):
            raise InputDomainError("Gaussian profile needs eps > 0 and alpha > 0")

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return self.eps * np.exp(-self.alpha * r * r)

    def dilation(self, r):
        r = np.asarray(r, dtype=float)
        return -2.0 * self.alpha * r * r * self.radial(r)

    def hessian(self, r):
        r = np.asarray(r, dtype=float)
        t = self.alpha * r * r
        return (4.0 * t * t - 2.0 * t) * self.radial(r)

    def enclosed(self, r):
        r = np.asarray(r, dtype=float)
        a = self.alpha
        t = a * r * r
        closed = np.sqrt(np.pi) * special.erf(np.sqrt(a) * r) / (4.0 * a**1.5) - r * np.exp(-t) / (2.0 * a)
        small = t < 0.05
        if np.any(small):
            # Series avoids cancellation of the two O(r) terms near the origin.
            rs, ts = r[small], t[small]
            acc = np.zeros_like(rs)
            term = np.ones_like(rs)
            for k in range(12):
                acc += term / (2 * k + 3)
                term = term * (-ts) / (k + 1)
            closed = np.array(closed, copy=True)
            closed[small] = rs**3 * acc
        return self.eps * closed

    def outer(self, r):
        r = np.asarray(r, dtype=float)
        return self.eps * np.exp(-self.alpha * r * r) / (2.0 * self.alpha)

    def coulomb(self, r):
        r = np.asarray(r, dtype=float)
        a = self.alpha
        scale = self.eps * np.sqrt(np.pi) / (8.0 * a**1.5)
        sr = np.sqrt(a) * r
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(sr > 0, special.erf(sr) / np.where(sr > 0, r, 1.0), 2.0 * np.sqrt(a / np.pi))
        return scale * ratio

    def self_energy(self) -> float:
        return self.eps**2 * math.sqrt(2.0) * math.pi**1.5 / (32.0 * self.alpha**2.5)


@dataclass(frozen=True)
class InverseRationalProfile(RadialProfile):
    """``rho = eps / (1 + alpha |x|^power)`` with ``power > 5/2``."""

    eps: float
    alpha: float
    power: float
    kind = "rational"

    def __post_init__(self):
        if not (self.eps > 0 and self.alpha > 0):
            raise InputDomainError("rational profile needs eps > 0 and alpha > 0")
        if not self.power > 2.5:
            raise InputDomainError("rational profile needs power > 5/2 for L^{6/5} integrability")

    def _q(self, r):
        return self.alpha * np.asarray(r, dtype=float) ** self.power

    def radial(self, r):
        return self.eps / (1.0 + self._q(r))

    def dilation(self, r):
        q = self._q(r)
        return -self.eps * self.power * q / (1.0 + q) ** 2

    def hessian(self, r):
        q = self._q(r)
        s = self.power
        euler_sq = -self.eps * s * s * q * (1.0 - q) / (1.0 + q) ** 3
        return euler_sq - self.dilation(r)

    def enclosed(self, r):
        r = np.asarray(r, dtype=float)
        s = self.power
        return self.eps * r**3 / 3.0 * special.hyp2f1(1.0, 3.0 / s, 1.0 + 3.0 / s, -self._q(r))

    def outer(self, r):
        r = np.asarray(r, dtype=float)
        s, a = self.power, self.alpha
        q = self._q(r)
        total = a ** (-2.0 / s) * (np.pi / s) / np.sin(2.0 * np.pi / s)
        inner = total - r * r / 2.0 * special.hyp2f1(1.0, 2.0 / s, 1.0 + 2.0 / s, -q)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = r ** (2.0 - s) / (a * (s - 2.0)) * special.hyp2f1(
                1.0, 1.0 - 2.0 / s, 2.0 - 2.0 / s, -1.0 / np.where(q > 0, q, 1.0)
            )
        return self.eps * np.where(q > 1.0, tail, inner)


@dataclass(frozen=True)
class Ball:
    center: tuple[float, float, float]
    radius: float
    amplitude: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 3:
            raise InputDomainError("ball center needs three coordinates")
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise InputDomainError("ball radius must be positive")
        if not self.amplitude > 0:
            raise InputDomainError("ball amplitude must be positive")

    @property
    def volume(self) -> float:
        return 4.0 * math.pi * self.radius**3 / 3.0


@dataclass(frozen=True)
class BallUnion:
    """``rho = sum_i alpha_i chi_{B_i}`` for pairwise disjoint closed balls."""

    balls: tuple[Ball, ...]
    kind = "balls"
    smooth = False

    def __post_init__(self):
        balls = tuple(self.balls)
        if not balls:
            raise InputDomainError("a ball union needs at least one ball")
        object.__setattr__(self, "balls", balls)
        for i, a in enumerate(balls):
            for b in balls[i + 1:]:
                gap = math.dist(a.center, b.center)
                if gap <= a.radius + b.radius:
                    raise InputDomainError("balls must be pairwise disjoint")

    def __call__(self, x, y, z) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z)))
        for b in self.balls:
            cx, cy, cz = b.center
            inside = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2 <= b.radius**2
            out = out + b.amplitude * inside
        return out

    def coulomb(self, x, y, z) -> np.ndarray:
        """Exact potential of the union (uniform-ball potentials)."""
        out = 0.0
        for b in self.balls:
            cx, cy, cz = b.center
            r = np.sqrt((x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2)
            R = b.radius
            with np.errstate(divide="ignore"):
                pot = np.where(r < R, (R * R - r * r / 3.0) / 4.0, R**3 / (6.0 * np.maximum(r, R)))
            out = out + b.amplitude * pot
        return np.asarray(out)

    def self_energy(self) -> float:
        total = 0.0
        for i, a in enumerate(self.balls):
            total += a.amplitude**2 * 4.0 * math.pi * a.radius**5 / 15.0
            for j, b in enumerate(self.balls):
                if i != j:
                    d = math.dist(a.center, b.center)
                    total += a.amplitude * b.amplitude * a.volume * b.radius**3 / (6.0 * d)
        return 0.25 * total


DopingProfile = Union[ZeroProfile, GaussianProfile, InverseRationalProfile, BallUnion]


def require_smooth(profile) -> RadialProfile:
    if not getattr(profile, "smooth", False):
        raise UnsupportedProfileError(f"{profile.kind} profile has no pointwise derivative data")
    return profile


def eval_derivative_data(profile, x) -> tuple[float, float, float]:
    """``(rho(x), x . grad rho(x), x . D^2 rho(x) x)`` in closed form."""
    prof = require_smooth(profile)
    r = np.array([float(np.linalg.norm(np.asarray(x, dtype=float)))])
    return float(prof.radial(r)[0]), float(prof.dilation(r)[0]), float(prof.hessian(r)[0])


@dataclass(frozen=True)
class L65Report:
    rho_norm: float
    dilation_norm: float | None
    hessian_norm: float | None
    smallness: float


def l65_norm_radial(func) -> float:
    """``||f||_{6/5}`` of a radial function by adaptive quadrature on ``[0, inf)``."""
    def integrand(r):
        return abs(float(func(np.array([r]))[0])) ** 1.2 * r * r

    value, _ = sci_integrate.quad(integrand, 0.0, np.inf, limit=400, epsabs=0.0, epsrel=1e-12)
    return float((4.0 * np.pi * value) ** (5.0 / 6.0))


def l65_report(profile, e: float) -> L65Report:
    """``L^{6/5}`` norms entering the smallness condition and ``e^2`` times their sum."""
    if isinstance(profile, BallUnion):
        rho_norm = sum(b.amplitude**1.2 * b.volume for b in profile.balls) ** (5.0 / 6.0)
        geometric = sum(b.amplitude * ball_geometry(b.radius, b.center).D_Omega for b in profile.balls)
        return L65Report(rho_norm, None, None, e * e * geometric)
    if isinstance(profile, ZeroProfile):
        return L65Report(0.0, 0.0, 0.0, 0.0)
    norms = [l65_norm_radial(profile.radial), l65_norm_radial(profile.dilation), l65_norm_radial(profile.hessian)]
    return L65Report(norms[0], norms[1], norms[2], e * e * sum(norms))


@dataclass(frozen=True)
class BallGeometry:
    R: float
    volume: float
    surface: float
    L: float
    kappa1: float
    kappa2: float
    mean_curvature: float
    H_norm: float
    D_Omega: float


def torsion_function(radius: float):
    """Solution of ``Delta w = kappa_1`` in the ball with unit normal derivative."""
    def w(points):
        return np.sum(points**2, axis=-1) / (2.0 * radius)

    def grad(points):
        return points / radius

    return w, grad


def ball_geometry(R: float, center=(0.0, 0.0, 0.0)) -> BallGeometry:
    """Trace and curvature data of a ball; mean curvature ``H = -2/R``.

    The sign follows ``H n = -(div_surface n) n``; only ``|H|`` enters ``D``.
    """
    if not (np.isfinite(R) and R > 0):
        raise InputDomainError("ball radius must be positive")
    volume = 4.0 * math.pi * R**3 / 3.0
    surface = 4.0 * math.pi * R**2
    reach = float(np.linalg.norm(center)) + R
    kappa1 = surface / volume
    _, grad = torsion_function(R)
    points, _, _ = sphere_points((0.0, 0.0, 0.0), R, order=17)
    kappa2 = float(np.max(np.linalg.norm(grad(points), axis=-1)))
    H = -2.0 / R
    H_norm = abs(H) * math.sqrt(surface)
    D = reach * volume ** (1.0 / 6.0) * (reach * H_norm + math.sqrt(surface)) * math.sqrt(kappa1 * volume ** (1.0 / 3.0) + kappa2)
    return BallGeometry(R, volume, surface, reach, kappa1, kappa2, H, H_norm, D)


def surface_E2_E3(S0: Field, balls: BallUnion, order: int = 41) -> tuple[float, float]:
    """Surface forms ``-1/2 sum a_i int S0 x.n`` and ``-1/2 sum a_i int H S0 (x.n)^2``."""
    interp = FieldInterpolator(np.asarray(S0.values.real), S0.spec)
    E2 = E3 = 0.0
    for b in balls.balls:
        points, normals, weights = sphere_points(b.center, b.radius, order)
        if np.max(np.abs(points)) >= S0.spec.half_width - 2.0 * S0.spec.spacing:
            raise InputDomainError("ball touches the grid boundary")
        values = interp(points)
        xn = np.sum(points * normals, axis=-1)
        H = ball_geometry(b.radius).mean_curvature
        E2 += -0.5 * b.amplitude * float(np.sum(weights * values * xn))
        E3 += -0.5 * b.amplitude * float(np.sum(weights * H * values * xn**2))
    return E2, E3


def pohozaev_density_combination(profile, r: np.ndarray) -> np.ndarray:
    """``2 rho + 3 x.grad rho + 1/2 x.D^2 rho x`` at radius ``r``."""
    prof = require_smooth(profile)
    return 2.0 * prof.radial(r) + 3.0 * prof.dilation(r) + 0.5 * prof.hessian(r)


def dilation_density_combination(profile, r: np.ndarray) -> np.ndarray:
    """``rho + x.grad rho`` at radius ``r``."""
    prof = require_smooth(profile)
    return prof.radial(r) + prof.dilation(r)


@dataclass(frozen=True)
class SignChanges:
    """Radii where a radial expression changes sign, and the sign just past the origin."""

    roots: tuple[float, ...]
    sign_at_origin: int

    def scaled(self, factor: float) -> tuple[float, ...]:
        return tuple(factor * r for r in self.roots)


def radial_sign_changes(func, r_max: float, samples: int = 4001, xtol: float = 1e-14) -> SignChanges:
    """Sign changes of ``func`` on ``(0, r_max]`` refined by Brent's method."""
    if not r_max > 0:
        raise InputDomainError("r_max must be positive")
    grid = np.linspace(0.0, r_max, samples)
    values = np.asarray(func(grid), dtype=float)
    signs = np.sign(values)
    roots = []
    for i in range(samples - 1):
        if signs[i] == 0.0 and i > 0:
            roots.append(float(grid[i]))
        elif signs[i] * signs[i + 1] < 0:
            f = lambda r: float(func(np.array([r]))[0])
            roots.append(float(optimize.brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)))
    nonzero = signs[signs != 0]
    return SignChanges(tuple(roots), int(nonzero[0]) if nonzero.size else 0)


def gaussian_sign_roots(profile: GaussianProfile, which: str = "pohozaev") -> tuple[float, ...]:
    """Sign-change locations in the variable ``t = alpha |x|^2``."""
    if not isinstance(profile, GaussianProfile):
        raise UnsupportedProfileError("sign roots in alpha |x|^2 need a Gaussian profile")
    funcs = {"pohozaev": pohozaev_density_combination, "dilation": dilation_density_combination}
    if which not in funcs:
        raise InputDomainError(f"unknown combination {which!r}; expected one of {sorted(funcs)}")
    r_max = math.sqrt(20.0 / profile.alpha)
    changes = radial_sign_changes(lambda r: funcs[which](profile, r) / profile.radial(r), r_max)
    return tuple(profile.alpha * r * r for r in changes.roots)
