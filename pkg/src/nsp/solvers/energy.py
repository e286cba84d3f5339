"""Energy ground states: minimise ``E`` on the sphere ``||u||_2^2 = mu``.

A projected Sobolev-gradient flow with renormalisation after every step
reaches a moderate residual; a bordered Newton-Krylov solve with the
frequency as extra unknown finishes.  The multiplier is always read off
by the Nehari formula.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from ..errors import ConvergenceError, InputDomainError, ParameterError, StagnationError
from ..functionals import (PhysParams, StateData, analyse, assemble, nonlinearity, omega_from_state, relative_norm,
                           require_exponent)
from ..grid import Field, invert_helmholtz, laplacian_values
from .newton import newton_polish, real_phase
from .report import SolveReport

log = logging.getLogger(__name__)

MASS_CRITICAL = 7.0 / 3.0


def energy_value(s: StateData, e: float) -> float:
    e2 = e * e
    return s.A / 2 - s.C / (s.p + 1) + e2 * s.D + 2 * e2 * s.E1


def energy_gradient(s: StateData, e: float) -> np.ndarray:
    """``E'(u) = -Lap u + e^2 (S0 + S1) u - |u|^{p-1} u``."""
    u = s.values
    return -laplacian_values(u, s.spec) + e * e * (s.S0 + s.S1) * u - nonlinearity(u, s.p)


def constrained_residual(s: StateData, e: float) -> tuple[np.ndarray, float, float]:
    """Residual ``E'(u) + w u`` with the Nehari multiplier, and its scale-free norm."""
    omega = omega_from_state(s, e)
    res = energy_gradient(s, e) + omega * s.values
    return res, relative_norm(res, s, omega), omega


def normalise(values: np.ndarray, mass: float, cell_volume: float) -> np.ndarray:
    current = float(np.sum(np.abs(values) ** 2) * cell_volume)
    if current == 0.0:
        raise InputDomainError("cannot normalise the zero state")
    return values * np.sqrt(mass / current)


def solve_energy_gss(mu: float, e: float, p: float, profile, init: Field, tol: float = 1e-6,
                     max_iter: int = 3000, route: str = "exact", polish: bool = True,
                     polish_switch: float = 1e-2, polish_target: float = 1e-11,
                     stagnation_window: int = 50, stop_when_negative: bool = False,
                     time_limit: float | None = None) -> SolveReport:
    """Energy ground state of mass ``mu``.

    With ``stop_when_negative`` the flow returns as soon as ``E < 0`` is seen,
    which is all a sign test of the infimum needs.
    """
    require_exponent(p, 2.0, MASS_CRITICAL)
    if not (np.isfinite(mu) and mu > 0):
        raise InputDomainError(f"mass must be positive, got {mu!r}")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    spec = init.spec
    dv = spec.cell_volume
    start = time.monotonic()
    u = normalise(np.asarray(init.values), mu, dv)
    s = analyse(u, p, profile, route, spec)
    energy = energy_value(s, e)
    history = []
    notes = []
    step = 1.0
    stalled = 0
    best = energy
    iterations = 0
    rn = float("inf")
    for iterations in range(1, max_iter + 1):
        res, rn, omega = constrained_residual(s, e)
        history.append((energy, rn))
        if stop_when_negative and energy < 0:
            notes.append("stopped at the first negative energy")
            break
        if rn <= tol:
            break
        if polish and rn <= polish_switch and omega > 0:
            real, phase, lost = real_phase(u)
            polished, _, steps = newton_polish(real, PhysParams(omega, e, p), profile, spec, route,
                                               target=polish_target, mass=mu)
            notes.append(f"bordered newton: {len(steps) - 1} steps, residual {steps[0]:.2e} -> {steps[-1]:.2e}")
            u = polished * phase if np.iscomplexobj(u) else polished
            s = analyse(u, p, profile, route, spec)
            energy = energy_value(s, e)
            polish = False
            continue
        gradient = energy_gradient(s, e)
        shift = max(omega, 0.1 * s.A / s.B)
        pre_u = invert_helmholtz(u, spec, shift)
        pre_g = invert_helmholtz(gradient, spec, shift)
        coefficient = np.real(np.vdot(u, pre_g)) / np.real(np.vdot(u, pre_u))
        direction = pre_g - coefficient * pre_u
        slope = float(np.real(np.vdot(direction, gradient))) * dv
        accepted = False
        while step > 1e-12:
            trial = normalise(u - step * direction, mu, dv)
            s_trial = analyse(trial, p, profile, route, spec)
            trial_energy = energy_value(s_trial, e)
            if trial_energy <= energy - 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise StagnationError(f"no descent step found at residual {rn:.3e}")
        u, s = trial, s_trial
        stalled = stalled + 1 if trial_energy >= best else 0
        best = min(best, trial_energy)
        energy = trial_energy
        if stalled >= stagnation_window:
            raise StagnationError("energy did not decrease for too many iterations")
        log.debug("energy iter %d: E %.12g residual %.3e omega %.6g step %.3g", iterations, energy, rn, omega, step)
        step = min(2.0 * step, 4.0)
        if time_limit is not None and time.monotonic() - start > time_limit:
            raise ConvergenceError("energy solve exceeded its time limit")
    else:
        raise ConvergenceError(f"energy solve did not converge in {max_iter} iterations (residual {rn:.3e})")
    u = normalise(u, mu, dv)
    s = analyse(u, p, profile, route, spec)
    _, rn, omega = constrained_residual(s, e)
    energy = energy_value(s, e)
    breakdown = None
    if omega > 0:
        breakdown = assemble(s, PhysParams(omega, e, p))
    else:
        notes.append(f"nonpositive multiplier {omega:.3e}: outside the regime where theory applies")
        log.warning("energy ground state has nonpositive multiplier %.3e", omega)
    return SolveReport(Field(spec, u), iterations, rn, breakdown, c_mu=energy, omega_mu=omega,
                       history=history, converged=rn <= tol, notes=notes)
