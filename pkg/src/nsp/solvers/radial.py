"""Radial states on a sine grid, carried as ``w = r u``.

Used for the global minimiser of ``I`` when ``1 < p < 2`` and for undoped
energy minimisers on very wide domains.  Grids are small enough that
Newton steps use dense Jacobians.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from ..doping import BallUnion, RadialProfile, UnsupportedProfileError, ZeroProfile
from ..errors import ConvergenceError, InputDomainError, StagnationError
from ..functionals import PhysParams, require_exponent
from ..grid import Field, GridSpec, RadialGrid
from ..poisson import radial_coulomb
from .report import SolveReport

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RadialData:
    grid: RadialGrid
    w: np.ndarray
    u: np.ndarray
    V0: np.ndarray
    S1: np.ndarray
    A: float
    B: float
    C: float
    D: float
    E1: float
    p: float

    def action(self, omega: float, e: float) -> float:
        e2 = e * e
        return self.A / 2 + omega * self.B / 2 - self.C / (self.p + 1) + e2 * self.D + 2 * e2 * self.E1

    def energy(self, e: float) -> float:
        return self.action(0.0, e)

    def nehari_omega(self, e: float) -> float:
        e2 = e * e
        return (self.C - self.A - 4 * e2 * self.D - 4 * e2 * self.E1) / self.B


def _require_radial(profile) -> RadialProfile:
    if isinstance(profile, BallUnion):
        raise UnsupportedProfileError("radial solvers need a radial profile")
    if not isinstance(profile, RadialProfile):
        raise UnsupportedProfileError(f"unsupported profile {profile!r}")
    return profile


def radial_analyse(grid: RadialGrid, w: np.ndarray, p: float, profile) -> RadialData:
    profile = _require_radial(profile)
    w = np.asarray(w, dtype=float)
    r = grid.r
    u = w / r
    density = u * u
    V0 = radial_coulomb(grid, density)
    S1 = -profile.coulomb(r)
    coeffs = grid.sine_coefficients(w)
    A = 4 * math.pi * float(np.sum((coeffs * grid.wavenumbers) ** 2)) * grid.r_max / 2
    B = grid.integrate(density)
    C = grid.integrate(np.abs(u) ** (p + 1))
    D = 0.25 * grid.integrate(V0 * density)
    E1 = 0.25 * grid.integrate(S1 * density)
    return RadialData(grid, w, u, V0, S1, A, B, C, D, E1, p)


def radial_residual(d: RadialData, omega: float, e: float) -> np.ndarray:
    """``r`` times the strong-form residual of ``I``."""
    w, u = d.w, d.u
    return (-d.grid.second_derivative(w) + omega * w + e * e * (d.V0 + d.S1) * w
            - np.abs(u) ** (d.p - 1) * w)


def radial_residual_norm(res: np.ndarray, d: RadialData, omega: float) -> float:
    """Radial counterpart of the scale-free 3D residual norm."""
    return float(np.sqrt(np.sum(res * res) / np.sum(d.w * d.w))) / (abs(omega) + d.A / d.B)


@lru_cache(maxsize=4)
def _dense_operators(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """Dense second-derivative and Coulomb matrices on the interior nodes."""
    eye = np.eye(grid.r.size)
    second = np.column_stack([grid.second_derivative(col) for col in eye])
    coulomb = np.column_stack([radial_coulomb(grid, col) for col in eye])
    return second, coulomb


def _jacobian(d: RadialData, omega: float, e: float) -> np.ndarray:
    second, coulomb = _dense_operators(d.grid)
    r = d.grid.r
    e2 = e * e
    diag = omega + e2 * (d.V0 + d.S1) - d.p * np.abs(d.u) ** (d.p - 1)
    jac = -second + np.diag(diag)
    jac += 2 * e2 * (d.w[:, None] * coulomb) * (d.w / r**2)[None, :]
    return jac


def _precondition(grid: RadialGrid, res: np.ndarray, shift: float) -> np.ndarray:
    return grid.from_sine(grid.sine_coefficients(res) / (shift + grid.wavenumbers**2))


@dataclass
class RadialState:
    grid: RadialGrid
    w: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.w / self.grid.r

    def dilate(self, scale: float) -> "RadialState":
        """``u_lam(r) = lam^2 u(lam r)``, i.e. ``w_lam(r) = lam w(lam r)``."""
        return RadialState(self.grid, scale * self.grid.evaluate_sine(self.w, scale * self.grid.r))

    def lift(self, spec: GridSpec) -> Field:
        """3D samples ``u(|x|)`` from the sine interpolant of ``w``."""
        radii, inverse = spec.radial_classes
        inside = radii > 0
        values = np.zeros_like(radii)
        values[inside] = self.grid.evaluate_sine(self.w, radii[inside]) / radii[inside]
        if not np.all(inside):
            values[~inside] = _origin_value(self)
        return Field(spec, values[inverse].reshape(spec.shape))


def _origin_value(state: RadialState) -> float:
    """``u(0) = w'(0)`` from the sine series."""
    coeffs = state.grid.sine_coefficients(state.w)
    return float(np.sum(coeffs * state.grid.wavenumbers))


def liquid_drop_init(grid: RadialGrid, params: PhysParams, radius: float, height: float = 1.0) -> RadialState:
    """Smoothed plateau of the given radius; ``height`` is in units of ``omega^{1/(p-1)}``."""
    p, w = params.p, params.omega
    height = height * w ** (1.0 / (p - 1))
    r = grid.r
    u = height * 0.5 * (1 - np.tanh((r - radius) * math.sqrt(w)))
    return RadialState(grid, r * u)


def radial_descent(grid: RadialGrid, w: np.ndarray, p: float, e: float, profile, omega: float | None,
                   mass: float | None, tol: float, max_iter: int, newton_switch: float,
                   stagnation_window: int = 200, stop_below: float | None = None) -> tuple[RadialData, list, float, int]:
    """Preconditioned descent on ``I`` (fixed ``omega``) or on ``E`` at fixed mass, then dense Newton.

    With ``stop_below`` the descent returns as soon as the objective drops below it.
    """
    dr = grid.dr
    norm = lambda v: 4 * math.pi * float(np.sum(v * v)) * dr
    if mass is not None:
        w = w * math.sqrt(mass / norm(w))
    d = radial_analyse(grid, w, p, profile)
    freq = lambda data: data.nehari_omega(e) if mass is not None else omega
    objective = lambda data: data.energy(e) if mass is not None else data.action(omega, e)
    value = objective(d)
    history = []
    step = 1.0
    stalled = 0
    rn = float("inf")
    newton = False
    for it in range(1, max_iter + 1):
        w_now = freq(d)
        res = radial_residual(d, w_now, e)
        rn = radial_residual_norm(res, d, w_now)
        history.append((value, rn))
        if rn <= tol or (stop_below is not None and value < stop_below):
            return d, history, rn, it
        if rn <= newton_switch or newton:
            newton = True
            d_new = _newton_step(d, w_now, e, profile, mass, res)
            if d_new is not None:
                res_new = radial_residual(d_new, freq(d_new), e)
                if radial_residual_norm(res_new, d_new, freq(d_new)) < rn:
                    d = d_new
                    value = objective(d)
                    continue
            newton = False
            newton_switch = rn * 1e-2
        shift = max(w_now, 0.1 * d.A / d.B) if mass is not None else omega
        grad = radial_residual(d, 0.0 if mass is not None else omega, e)
        direction = _precondition(grid, grad, shift)
        if mass is not None:
            pre_w = _precondition(grid, d.w, shift)
            direction = direction - (np.sum(d.w * direction) / np.sum(d.w * pre_w)) * pre_w
        slope = 4 * math.pi * float(np.sum(direction * grad)) * dr
        while step > 1e-14:
            trial = d.w - step * direction
            if mass is not None:
                trial = trial * math.sqrt(mass / norm(trial))
            d_trial = radial_analyse(grid, trial, p, profile)
            if objective(d_trial) <= value - 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            raise StagnationError(f"radial descent found no step at residual {rn:.3e}")
        new_value = objective(d_trial)
        stalled = stalled + 1 if new_value >= value else 0
        if stalled >= stagnation_window:
            raise StagnationError("radial descent stagnated")
        d, value = d_trial, new_value
        step = min(2 * step, 8.0)
    raise ConvergenceError(f"radial solve did not converge (residual {rn:.3e})")


def _newton_step(d: RadialData, omega: float, e: float, profile, mass, res) -> RadialData | None:
    jac = _jacobian(d, omega, e)
    try:
        if mass is None:
            delta = sla.solve(jac, -res)
        else:
            n = d.w.size
            dr = d.grid.dr
            big = np.zeros((n + 1, n + 1))
            big[:n, :n] = jac
            big[:n, n] = d.w
            big[n, :n] = 8 * math.pi * dr * d.w
            rhs = np.concatenate([-res, [mass - d.B]])
            delta = sla.solve(big, rhs)[:n]
    except (sla.LinAlgError, ValueError):
        return None
    w = d.w + delta
    if mass is not None:
        w = w * math.sqrt(mass / (4 * math.pi * float(np.sum(w * w)) * d.grid.dr))
    return radial_analyse(d.grid, w, d.p, profile)


def solve_radial_global(params: PhysParams, profile, init: RadialState | None = None, tol: float = 1e-9,
                        grid: RadialGrid | None = None, max_iter: int = 20000,
                        drop_radii=(1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 16.0, 24.0),
                        drop_heights=(1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 32.0)) -> SolveReport:
    """Global minimiser of ``I`` over radial states for ``1 < p < 2``.

    Without ``init`` the solve starts from the best of a scan of plateau
    states.  The report's notes record whether ``I < 0`` and the sampled
    dilation and amplitude families.
    """
    require_exponent(params.p, 1.0, 2.0)
    profile = _require_radial(profile)
    if grid is None:
        grid = init.grid if init is not None else RadialGrid(1600, 80.0)
    if init is None:
        candidates = [liquid_drop_init(grid, params, R, h) for R in drop_radii for h in drop_heights
                      if R < 0.6 * grid.r_max]
        values = [radial_analyse(grid, c.w, params.p, profile).action(params.omega, params.e) for c in candidates]
        init = candidates[int(np.argmin(values))]
    d, history, rn, iterations = radial_descent(grid, init.w, params.p, params.e, profile, params.omega, None,
                                                tol, max_iter, newton_switch=1e-3)
    state = RadialState(grid, d.w)
    I0 = d.action(params.omega, params.e)
    notes = []
    if not I0 < 0:
        notes.append("I(u0) >= 0: e may be too large for the negative-level regime")
    family = sampled_families(state, params, profile)
    notes.append(f"minimal over sampled families: {family['minimal']}")
    return SolveReport(state, iterations, rn, None, sigma=I0, omega_mu=params.omega, history=history,
                       converged=rn <= tol, notes=notes, extras={"family": family, "radial_data": d})


def sampled_families(state: RadialState, params: PhysParams, profile, scales=(0.8, 0.9, 0.95, 1.05, 1.1, 1.25),
                     amplitudes=(0.8, 0.9, 0.95, 1.05, 1.1, 1.25)) -> dict:
    """``I`` at dilations and amplitude multiples of a radial state."""
    base = radial_analyse(state.grid, state.w, params.p, profile).action(params.omega, params.e)
    dil = {s: radial_analyse(state.grid, state.dilate(s).w, params.p, profile).action(params.omega, params.e)
           for s in scales}
    amp = {t: radial_analyse(state.grid, t * state.w, params.p, profile).action(params.omega, params.e)
           for t in amplitudes}
    minimal = all(v >= base for v in dil.values()) and all(v >= base for v in amp.values())
    return {"base": base, "dilations": dil, "amplitudes": amp, "minimal": minimal}


def solve_radial_energy(mu: float, e: float, p: float, init: RadialState, profile=None, tol: float = 1e-9,
                        max_iter: int = 20000,
                        stop_when_negative: bool = False):
    """Constrained minimiser of ``E`` on the radial line; returns ``(RadialData, rn)``.

    With ``stop_when_negative`` the descent ends at the first negative energy.
    """
    profile = ZeroProfile() if profile is None else profile
    if not (np.isfinite(mu) and mu > 0):
        raise InputDomainError("mass must be positive")
    require_exponent(p, 2.0, 7.0 / 3.0)
    d, history, rn, it = radial_descent(init.grid, init.w, p, e, profile, None, mu, tol, max_iter, newton_switch=1e-3,
                                        stop_below=0.0 if stop_when_negative else None)
    return d, rn
