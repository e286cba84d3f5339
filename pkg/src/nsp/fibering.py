"""The dilation family ``u_lam(x) = lam^2 u(lam x)`` and its fibering map.

``f(lam) = I(u_lam)`` and ``J(u_lam) = lam f'(lam)`` follow from the primitives
of ``u`` plus two doping integrals

    rho_int(lam) = int S0(u) rho(x/lam) dx,
    dil_int(lam) = int S0(u) (x/lam) . grad rho(x/lam) dx,

so a whole scan costs a single Coulomb solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .doping import Ball, BallUnion, RadialProfile, UnsupportedProfileError, ball_geometry
from .errors import InputDomainError, ParameterError, ProjectionError
from .functionals import PhysParams, StateData, analyse, assemble
from .grid import Field
from .quadrature import FieldInterpolator, ball_points, sphere_points

SCAN_RANGE = (1.0 / 16.0, 16.0)
SCAN_POINTS = 257


class Fiber:
    """Fibering map of one analysed state at fixed parameters."""

    def __init__(self, state: StateData, params: PhysParams):
        if state.B == 0.0:
            raise InputDomainError("the fibering map of the zero state is trivial")
        self.state = state
        self.params = params
        self.breakdown = assemble(state, params)
        profile = state.profile
        self._weights = None
        self._interp = None
        if isinstance(profile, BallUnion):
            self._interp = ExtendedPotential(state)
        elif state.route == "exact":
            radii, inverse = state.spec.radial_classes
            self._radii = radii
            self._weights = np.bincount(inverse, weights=state.density.ravel()) * state.spec.cell_volume

    def doping_integrals(self, lam: float) -> tuple[float, float]:
        """``(rho_int(lam), dil_int(lam))``."""
        s = self.state
        profile = s.profile
        dv = s.spec.cell_volume
        if isinstance(profile, BallUnion):
            x, y, z = s.spec.mesh()
            pot = profile.coulomb(x / lam, y / lam, z / lam)
            rho_int = lam**2 * float(np.sum(s.density * pot) * dv)
            first = sum(b.amplitude * _surface_first(self._interp, b, lam) for b in profile.balls)
            return rho_int, -lam * first
        if self._weights is not None:
            scaled = self._radii / lam
            rho_int = lam**2 * float(self._weights @ profile.coulomb(scaled))
            dil_int = lam**2 * float(self._weights @ profile.coulomb_of_dilation(scaled))
            return rho_int, dil_int
        r = s.spec.radius / lam
        return (float(np.sum(s.S0 * profile.radial(r)) * dv),
                float(np.sum(s.S0 * profile.dilation(r)) * dv))

    def terms(self, lam: float) -> dict:
        b, p, e2 = self.breakdown, self.params.p, self.params.e**2
        w = self.params.omega
        rho_int, dil_int = self.doping_integrals(lam)
        power = lam ** (2 * p - 1)
        f = (lam**3 * b.A / 2 + w * lam * b.B / 2 - power * b.C / (p + 1)
             + e2 * lam**3 * b.D - e2 / (2 * lam) * rho_int)
        J = (1.5 * lam**3 * b.A + 0.5 * w * lam * b.B - (2 * p - 1) / (p + 1) * power * b.C
             + 3 * e2 * lam**3 * b.D + e2 / (2 * lam) * (rho_int + dil_int))
        scale = lam**3 * b.A + w * lam * b.B + power * b.C
        return {"f": f, "J": J, "rho_int": rho_int, "dil_int": dil_int, "scale": scale}

    def __call__(self, lam: float) -> tuple[float, float]:
        if not (np.isfinite(lam) and lam > 0):
            raise InputDomainError(f"lambda must be positive, got {lam!r}")
        t = self.terms(lam)
        return t["f"], t["J"]


class ExtendedPotential:
    """``S0`` inside the box by interpolation, beyond it by a multipole series."""

    def __init__(self, state: StateData, margin_cells: float = 2.0):
        spec = state.spec
        self._interp = FieldInterpolator(state.S0, spec)
        self.limit = spec.half_width - margin_cells * spec.spacing
        x, y, z = spec.mesh()
        coords = np.broadcast_arrays(x, y, z)
        dv = spec.cell_volume
        q = state.density
        self.monopole = float(q.sum() * dv)
        self.dipole = np.array([float(np.sum(q * c) * dv) for c in coords])
        second = np.array([[float(np.sum(q * a * b) * dv) for b in coords] for a in coords])
        self.quadrupole = 3.0 * second - np.trace(second) * np.eye(3)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 3)
        inside = np.max(np.abs(flat), axis=1) <= self.limit
        out = np.empty(flat.shape[0])
        if np.any(inside):
            out[inside] = self._interp(flat[inside])
        if not np.all(inside):
            far = flat[~inside]
            r = np.linalg.norm(far, axis=1)
            quad = np.einsum("ni,ij,nj->n", far, self.quadrupole, far)
            out[~inside] = (self.monopole / r + far @ self.dipole / r**3 + 0.5 * quad / r**5) / (8 * np.pi)
        return out.reshape(points.shape[:-1])


def _surface_first(interp, ball: Ball, lam: float) -> float:
    """``lam^2 int_{dB} S0(lam y) (y . n) dS``."""
    points, normals, weights = sphere_points(ball.center, ball.radius)
    yn = np.sum(points * normals, axis=-1)
    return lam**2 * float(np.sum(weights * interp(lam * points) * yn))


def fiber_eval(u: Field, lam: float, params: PhysParams, profile, route: str = "exact") -> tuple[float, float]:
    """``(f(lam), J(u_lam))``."""
    if not (np.isfinite(lam) and lam > 0):
        raise InputDomainError(f"lambda must be positive, got {lam!r}")
    return Fiber(analyse(u, params.p, profile, route), params)(lam)


@dataclass
class FiberScan:
    lambdas: np.ndarray
    f_values: np.ndarray
    J_values: np.ndarray
    critical_points: list[float] = field(default_factory=list)
    unique_max: bool = False
    lambda_u: float = float("nan")

    @property
    def sign_changes(self) -> int:
        return len(self.critical_points)

    def rows(self):
        return zip(self.lambdas, self.f_values, self.J_values)


def scan_fiber(fiber: Fiber, lam_range=SCAN_RANGE, points: int = SCAN_POINTS) -> FiberScan:
    """Sample ``f`` and ``J`` on a log grid and refine sign changes of ``J``."""
    lams = np.geomspace(lam_range[0], lam_range[1], points)
    fJ = np.array([fiber(l) for l in lams])
    f_vals, J_vals = fJ[:, 0], fJ[:, 1]
    roots = []
    f_at_roots = []
    for i in np.nonzero(np.sign(J_vals[:-1]) * np.sign(J_vals[1:]) < 0)[0]:
        root = refine_root(fiber, lams[i], lams[i + 1])
        roots.append(root)
        f_at_roots.append(fiber(root)[0])
    for i in np.nonzero(J_vals == 0.0)[0]:
        roots.append(float(lams[i]))
        f_at_roots.append(f_vals[i])
    scan = FiberScan(lams, f_vals, J_vals, sorted(roots))
    scan.unique_max = len(roots) == 1
    if roots:
        scan.lambda_u = float(roots[int(np.argmax(f_at_roots))])
    return scan


def refine_root(fiber: Fiber, lo: float, hi: float) -> float:
    """Bracketed root of ``J(u_lam)`` to rounding level."""
    return float(optimize.brentq(lambda l: fiber(l)[1], lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))


def project_to_manifold(u: Field, params: PhysParams, profile, route: str = "exact") -> tuple[float, FiberScan]:
    """Scale factor ``lam_u`` with ``u_{lam_u}`` on the Nehari-Pohozaev set."""
    fiber = Fiber(analyse(u, params.p, profile, route), params)
    return project_fiber(fiber)


def project_fiber(fiber: Fiber, lam_range=SCAN_RANGE) -> tuple[float, FiberScan]:
    scan = scan_fiber(fiber, lam_range)
    if not scan.critical_points:
        wide = (lam_range[0] / 4.0, lam_range[1] * 4.0)
        scan = scan_fiber(fiber, wide)
    if not scan.critical_points:
        raise ProjectionError("J(u_lam) has no sign change on the scan range")
    return scan.lambda_u, scan


def local_projection(fiber: Fiber, guess: float = 1.0, factor: float = 1.5) -> float:
    """Root of ``J`` near ``guess`` where ``J`` turns from positive to negative."""
    lo, hi = guess / factor, guess * factor
    for _ in range(6):
        if fiber(lo)[1] > 0 > fiber(hi)[1]:
            return refine_root(fiber, lo, hi)
        lo, hi = lo / factor, hi * factor
    return project_fiber(fiber)[0]


def g_poly(lam, p: float):
    """``g(lam) = 3 lam^{2p-1} - (2p-1) lam^3 + 2p - 4``."""
    lam = np.asarray(lam, dtype=float)
    return 3 * lam ** (2 * p - 1) - (2 * p - 1) * lam**3 + 2 * p - 4


def g_poly_prime(lam, p: float):
    lam = np.asarray(lam, dtype=float)
    return 3 * (2 * p - 1) * (lam ** (2 * p - 2) - lam**2)


def g_poly_second(lam, p: float):
    """Direct second derivative ``6(2p-1)((p-1) lam^{2p-3} - lam)``."""
    lam = np.asarray(lam, dtype=float)
    return 6 * (2 * p - 1) * ((p - 1) * lam ** (2 * p - 3) - lam)


@dataclass(frozen=True)
class FiberConstants:
    p: float
    T: float
    tau: float
    C1: float
    C2: float
    alpha: float
    bounds_hold: bool


def default_T(p: float) -> float:
    return max(4.0, 3.0 ** (1.0 / (2 * p - 4)))


def fiber_constants(p: float, T: float | None = None, samples: int = 20001) -> FiberConstants:
    """Explicit constants of the ``g`` lower bounds and their dense-grid check."""
    if not p > 2:
        raise ParameterError("the constants need p > 2")
    if p >= 5:
        raise ParameterError("the constants need p < 5")
    k = 2 * p - 4
    T = default_T(p) if T is None else float(T)
    if T < 4 or T**k < 3 * (1 - 1e-15):
        raise InputDomainError("T must satisfy T >= 4 and T^{2p-4} >= 3")
    tau = 1.0 - (p / (2 * (p - 1))) ** (1.0 / k)
    C1 = 3 * T**k - (2 * p - 1)
    C2 = min(float(g_poly(1 + tau, p)) / tau**2, 1.5 * (2 * p - 1) * ((1 + tau) ** k - 1))
    alpha = min(1.5 * (p - 1) * (p - 2), float(g_poly(1 - tau, p)), C1, C2)
    near = np.linspace(0.0, T, samples)
    far = np.linspace(T, 4 * T, samples)
    slack = 1e-12 * (1 + T ** (2 * p - 1))
    ok = bool(np.all(g_poly(near, p) - alpha * (1 - near) ** 2 >= -slack)
              and np.all(g_poly(far, p) - alpha * far**3 >= -slack))
    return FiberConstants(p, T, tau, C1, C2, alpha, ok)


def coefficient_bounds_hold(T: float, samples: int = 20001) -> bool:
    """``(1-l)^2(l+2)/6`` against ``(1-l)^2/3`` on ``[0,T]`` and ``(1-l)^2/6 + l^3/(3T)`` beyond."""
    near = np.linspace(0.0, T, samples)
    far = np.linspace(T, 50 * T, samples)
    coef = lambda l: (1 - l) ** 2 * (l + 2) / 6
    slack = 1e-12
    return bool(np.all(coef(near) - (1 - near) ** 2 / 3 >= -slack * (1 + near**3))
                and np.all(coef(far) - (1 - far) ** 2 / 6 - far**3 / (3 * T) >= -slack * far**3))


def decomposition_terms(fiber: Fiber, lam: float) -> dict:
    """Both sides of the energy decomposition of ``I(u) - I(u_lam)``."""
    b, p, w = fiber.breakdown, fiber.params.p, fiber.params.omega
    t = fiber.terms(lam)
    lhs = b.I - t["f"]
    J_term = (1 - lam**3) / 3 * b.J
    B_term = (1 - lam) ** 2 * (lam + 2) * w / 6 * b.B
    C_term = float(g_poly(lam, p)) * b.C / (3 * (p + 1))
    R = remainder_by_definition(fiber, lam, t["rho_int"])
    rhs = J_term + B_term + C_term + R
    magnitude = max(abs(lhs), abs(J_term), abs(B_term), abs(C_term), abs(R), abs(b.I), abs(t["f"]))
    return {"lhs": lhs, "J_term": J_term, "B_term": B_term, "C_term": C_term, "R": R,
            "rhs": rhs, "residual": abs(lhs - rhs), "max_term": magnitude}


def decomposition_residual(u: Field, lam: float, params: PhysParams, profile, route: str = "exact") -> float:
    """``|LHS - RHS|`` of the decomposition of ``I(u) - I(u_lam)``."""
    if not (np.isfinite(lam) and lam > 0):
        raise InputDomainError(f"lambda must be positive, got {lam!r}")
    return decomposition_terms(Fiber(analyse(u, params.p, profile, route), params), lam)["residual"]


def remainder_by_definition(fiber: Fiber, lam: float, rho_int: float | None = None) -> float:
    b, e2 = fiber.breakdown, fiber.params.e**2
    if rho_int is None:
        rho_int = fiber.doping_integrals(lam)[0]
    return ((8 - 2 * lam**3) / 3 * e2 * b.E1 - (1 - lam**3) / 3 * e2 * b.E2
            + e2 / (2 * lam) * rho_int)


def remainder_direct(fiber: Fiber, lam: float) -> float:
    """``e^2 int S0(u) M(lam, x) dx`` with ``M`` combined pointwise before integrating."""
    s = fiber.state
    profile = s.profile
    if not isinstance(profile, RadialProfile):
        raise UnsupportedProfileError("the remainder needs a smooth profile")
    e2 = fiber.params.e**2
    dv = s.spec.cell_volume
    c = (lam**3 - 1) / 6
    if s.route == "exact":
        radii, inverse = s.spec.radial_classes
        pot = (c * (profile.coulomb(radii) + profile.coulomb_of_dilation(radii))
               - profile.coulomb(radii) / 2 + lam * profile.coulomb(radii / lam) / 2)
        return e2 * float(np.sum(s.density * pot[inverse].reshape(s.spec.shape)) * dv)
    r = s.spec.radius
    M = c * (profile.radial(r) + profile.dilation(r)) - profile.radial(r) / 2 + profile.radial(r / lam) / (2 * lam)
    return e2 * float(np.sum(s.S0 * M) * dv)


@dataclass
class RemainderReport:
    lambdas: np.ndarray
    by_definition: np.ndarray
    direct: np.ndarray
    max_relative_gap: float
    beta: np.ndarray


def remainder_bound_report(u: Field, profile, params: PhysParams, lambdas, route: str = "exact") -> RemainderReport:
    """Remainder by both routes and the measured ratio against its bound shape."""
    from .doping import l65_report

    if not isinstance(profile, RadialProfile):
        raise UnsupportedProfileError("the remainder needs a smooth profile")
    fiber = Fiber(analyse(u, params.p, profile, route), params)
    lams = np.asarray(lambdas, dtype=float)
    by_def = np.array([remainder_by_definition(fiber, l) for l in lams])
    direct = np.array([remainder_direct(fiber, l) for l in lams])
    denom_scale = np.maximum(np.abs(by_def), np.abs(direct))
    gaps = np.where(denom_scale > 0, np.abs(by_def - direct) / np.where(denom_scale > 0, denom_scale, 1), 0.0)
    report = l65_report(profile, params.e)
    b = fiber.breakdown
    bound = (1 - lams) ** 2 * report.smallness * (b.B + b.C ** (2 / (params.p + 1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(bound > 0, -by_def / bound, np.nan)
    return RemainderReport(lams, by_def, direct, float(np.max(gaps)) if gaps.size else 0.0, beta)


@dataclass(frozen=True)
class MovingDomainDerivatives:
    value: float
    first: float
    second: float
    second_curvature_form: float


def moving_domain_derivatives(S0: Field, ball, lam: float, order: int = 41, radial_nodes: int = 24) -> MovingDomainDerivatives:
    """``Omega(lam) = int_{lam B} S0`` and its first two derivatives.

    ``second`` differentiates the surface form directly,
    ``2 lam int S0(lam y)(y.n) + lam^2 int grad S0(lam y).y (y.n)``;
    ``second_curvature_form`` is the curvature form without the normal-derivative
    contribution, reported for comparison only.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise InputDomainError(f"lambda must be positive, got {lam!r}")
    if not isinstance(ball, Ball):
        center, radius = ball
        ball = Ball(center, radius, 1.0)
    interp = FieldInterpolator(np.asarray(S0.values.real), S0.spec)
    c = np.asarray(ball.center)
    vol_pts, vol_w = ball_points(lam * c, lam * ball.radius, radial_nodes, order)
    value = float(np.sum(vol_w * interp(vol_pts)))
    points, normals, weights = sphere_points(c, ball.radius, order)
    yn = np.sum(points * normals, axis=-1)
    s0 = interp(lam * points)
    grad = interp.gradient(lam * points)
    first = lam**2 * float(np.sum(weights * s0 * yn))
    radial_derivative = np.sum(grad * points, axis=-1)
    second = 2 * lam * float(np.sum(weights * s0 * yn)) + lam**2 * float(np.sum(weights * radial_derivative * yn))
    H = ball_geometry(ball.radius).mean_curvature
    curvature_form = -2 * lam * float(np.sum(weights * s0 * yn)) - lam * float(np.sum(weights * H * s0 * yn**2))
    return MovingDomainDerivatives(value, first, second, curvature_form)
