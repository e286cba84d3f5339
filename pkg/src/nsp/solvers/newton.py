"""Newton-Krylov refinement of real stationary states.

The linearisation of the stationary equation at a real state ``u`` is

    L v = -Lap v + w v + e^2 (S0 + S1) v + 2 e^2 K*(u v) u - p |u|^{p-1} v,

symmetric in the Euclidean inner product of grid samples and indefinite, so
MINRES with the positive-definite preconditioner ``(w - Lap)^{-1}`` is used.
With a mass constraint the system is bordered by the column ``u``.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from ..functionals import PhysParams, analyse, omega_from_state, relative_norm, residual_values
from ..grid import GridSpec, invert_helmholtz, laplacian_values
from ..poisson import coulomb_values, profile_potentials

log = logging.getLogger(__name__)


def real_phase(values: np.ndarray) -> tuple[np.ndarray, complex, float]:
    """Rotate the global phase so the state is as real as possible.

    Returns the real part, the removed phase factor and the relative size of
    the discarded imaginary part.
    """
    if not np.iscomplexobj(values):
        return np.asarray(values, dtype=float), 1.0 + 0.0j, 0.0
    moment = np.sum(values * values)
    phase = np.exp(0.5j * np.angle(moment)) if moment != 0 else 1.0 + 0.0j
    rotated = values / phase
    if np.sum(rotated.real) < 0:
        rotated, phase = -rotated, -phase
    norm = np.sqrt(np.sum(np.abs(rotated) ** 2))
    lost = float(np.sqrt(np.sum(rotated.imag**2)) / norm) if norm > 0 else 0.0
    return rotated.real.copy(), phase, lost


def _linearisation(u: np.ndarray, potential: np.ndarray, params: PhysParams, spec: GridSpec):
    e2, w, p = params.e**2, params.omega, params.p
    power = p * np.abs(u) ** (p - 1)
    shape = spec.shape

    def apply(flat: np.ndarray) -> np.ndarray:
        v = flat.reshape(shape)
        out = -laplacian_values(v, spec) + (w + e2 * potential - power) * v
        out += 2 * e2 * coulomb_values(u * v, spec) * u
        return out.ravel()

    return apply


def newton_polish(values: np.ndarray, params: PhysParams, profile, spec: GridSpec, route: str = "exact",
                  target: float = 1e-11, max_steps: int = 12, mass: float | None = None,
                  krylov_rtol: float = 1e-3, krylov_maxiter: int = 300):
    """Refine a real near-solution; with ``mass`` the frequency is an unknown too.

    Returns ``(values, params, history)`` where ``history`` lists the scale-free
    residual after each accepted step.  Steps are damped until the residual
    decreases; the loop ends when it reaches ``target`` or stops improving.
    """
    u = np.asarray(values, dtype=float).copy()
    S1 = profile_potentials(profile, spec, route)[0]
    size = u.size
    dv = spec.cell_volume
    history = []

    def state_residual(u_values, prm):
        s = analyse(u_values, prm.p, profile, route, spec)
        if mass is not None:
            prm = prm.with_omega(omega_from_state(s, prm.e))
        res = residual_values(s, prm)
        return s, prm, res, relative_norm(res, s, prm.omega)

    s, params, res, rn = state_residual(u, params)
    history.append(rn)
    for step in range(max_steps):
        if rn <= target:
            break
        apply_L = _linearisation(u, s.S0 + S1, params, spec)
        precondition = lambda r: invert_helmholtz(r.reshape(spec.shape), spec, params.omega).ravel()
        if mass is None:
            op = LinearOperator((size, size), matvec=apply_L, dtype=float)
            pre = LinearOperator((size, size), matvec=precondition, dtype=float)
            delta, info = minres(op, -res.ravel(), M=pre, rtol=krylov_rtol, maxiter=krylov_maxiter)
            du = delta.reshape(spec.shape)
        else:
            flat_u = u.ravel()
            border_scale = float(flat_u @ precondition(flat_u))

            def apply_bordered(z):
                v, t = z[:size], z[size]
                return np.concatenate([apply_L(v) + t * flat_u, [flat_u @ v]])

            def pre_bordered(z):
                return np.concatenate([precondition(z[:size]), [z[size] / border_scale]])

            op = LinearOperator((size + 1, size + 1), matvec=apply_bordered, dtype=float)
            pre = LinearOperator((size + 1, size + 1), matvec=pre_bordered, dtype=float)
            rhs = np.concatenate([-res.ravel(), [(mass - s.B) / (2 * dv)]])
            delta, info = minres(op, rhs, M=pre, rtol=krylov_rtol, maxiter=krylov_maxiter)
            du = delta[:size].reshape(spec.shape)
        damping = 1.0
        improved = False
        while damping >= 1.0 / 64:
            trial = u + damping * du
            if mass is not None:
                trial = trial * np.sqrt(mass / (np.sum(trial**2) * dv))
            s_t, p_t, res_t, rn_t = state_residual(trial, params)
            if rn_t < rn:
                improved = True
                break
            damping /= 2
        log.debug("newton step %d: residual %.3e -> %.3e (damping %g, minres info %d)",
                  step, rn, rn_t, damping, info)
        if not improved:
            break
        gain = rn / rn_t
        u, s, params, res, rn = trial, s_t, p_t, res_t, rn_t
        history.append(rn)
        if gain < 1.5 and krylov_rtol <= 1e-8:
            break
        if gain < 4:
            krylov_rtol = max(krylov_rtol * 1e-2, 1e-10)
    return u, params, history
