"""Action ground states: minimise ``I`` over the Nehari-Pohozaev set.

Each outer iteration takes a descent step on ``I`` preconditioned by
``(w - Lap)^{-1}`` and locates the trial's maximum along its fibre; the
trial is accepted on the minimax level ``max_lam I(trial_lam)``, which is
evaluated exactly from the trial's primitives, so the level decreases
monotonically.  The grid state is rescaled onto the Nehari-Pohozaev set
only when the scale factor leaves ``[1 - rescale_gap, 1 + rescale_gap]``:
each resampling perturbs slowly decaying tails, and near convergence the
factor tends to one anyway.  Newton-Krylov steps finish the solve.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from ..errors import ParameterError, StagnationError, ConvergenceError
from ..fibering import Fiber, local_projection, project_fiber
from ..functionals import PhysParams, analyse, assemble, relative_norm, residual_values, require_exponent
from ..grid import Field, GridSpec, dilate, invert_helmholtz
from .newton import newton_polish, real_phase
from .report import SolveReport

log = logging.getLogger(__name__)


def gaussian_init(spec: GridSpec, params: PhysParams, width: float | None = None, center=(0.0, 0.0, 0.0),
                  amplitude: float | None = None) -> Field:
    """Real Gaussian, by default with the local ground-state peak amplitude and width."""
    width = 1.0 / np.sqrt(params.omega) if width is None else width
    if amplitude is None:
        amplitude = (0.5 * (params.p + 1) * params.omega) ** (1.0 / (params.p - 1))
    if not (width > 0 and amplitude > 0):
        raise ParameterError("Gaussian width and amplitude must be positive")
    x, y, z = spec.mesh()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2
    return Field(spec, amplitude * np.exp(-r2 / (2 * width**2)))


def projected_gaussian_init(spec: GridSpec, params: PhysParams, profile, width: float | None = None,
                            amplitude: float | None = None, route: str = "exact") -> tuple[Field, float]:
    """Gaussian moved onto its fibre maximum analytically.

    ``lam^2 g(lam x)`` of a Gaussian is the Gaussian with amplitude ``lam^2``
    times larger and width ``lam`` times smaller, so the returned state needs
    no resampling.  Also returns the factor that was applied.
    """
    base = gaussian_init(spec, params, width, amplitude=amplitude)
    width = 1.0 / np.sqrt(params.omega) if width is None else width
    amp = float(np.max(base.values))
    total = 1.0
    for _ in range(4):
        lam, _ = project_fiber(Fiber(analyse(base, params.p, profile, route), params))
        total *= lam
        amp, width = amp * lam * lam, width / lam
        base = gaussian_init(spec, params, width, amplitude=amp)
        if abs(lam - 1.0) < 1e-10:
            break
    return base, total


def solve_action_gss(params: PhysParams, profile, init: Field, tol: float = 1e-6, max_iter: int = 400,
                     route: str = "exact", polish: bool = True, polish_switch: float = 1e-2,
                     polish_target: float = 1e-11, stagnation_window: int = 50, rescale_gap: float = 1e-3,
                     floor_window: int = 25, floor_cap: float = 0.25,
                     time_limit: float | None = None) -> SolveReport:
    """Action ground state at frequency ``params.omega``.

    The descent stays on the continuum constraint set, so on a coarse grid its
    residual floors at the discretisation defect of ``P``.  Newton takes over
    once the residual drops below ``polish_switch``, or once it has not
    improved by 10% for ``floor_window`` iterations while below ``floor_cap``.

    Raises ``ProjectionError`` if the fibre has no critical point,
    ``StagnationError`` after ``stagnation_window`` iterations without decrease
    and ``ConvergenceError`` when ``max_iter`` is exhausted.
    """
    require_exponent(params.p, 2.0, 5.0)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    spec = init.spec
    start = time.monotonic()
    fiber = Fiber(analyse(init, params.p, profile, route), params)
    lam, scan = project_fiber(fiber)
    notes = [f"initial projection lambda={lam:.6g} roots={scan.sign_changes}"]
    u = dilate(init.values, spec, lam)
    fiber = Fiber(analyse(u, params.p, profile, route, spec), params)
    lam = local_projection(fiber)
    level = fiber(lam)[0]
    step = 1.0
    history = []
    stalled = 0
    iterations = 0
    rn = best_rn = float("inf")
    since_best = 0
    for iterations in range(1, max_iter + 1):
        # The state on the set is u_lam; the gradient of the minimax level is
        # I'(u_lam) pulled back along the dilation.
        if lam == 1.0:
            u_on, s_on = u, fiber.state
        else:
            u_on = dilate(u, spec, lam)
            s_on = analyse(u_on, params.p, profile, route, spec)
        res = residual_values(s_on, params)
        rn = relative_norm(res, s_on, params.omega)
        history.append((level, rn))
        b = assemble(s_on, params)
        if rn <= tol and abs(b.J) <= tol * b.scale:
            u = u_on
            break
        if rn < 0.9 * best_rn:
            best_rn, since_best = rn, 0
        else:
            since_best += 1
        floored = since_best >= floor_window and rn <= floor_cap
        if polish and (rn <= polish_switch or floored):
            if floored:
                notes.append(f"descent floored at residual {rn:.2e} after {iterations} iterations")
            u, rn = _polish(u_on, params, profile, route, spec, polish_target, notes)
            fiber = Fiber(analyse(u, params.p, profile, route, spec), params)
            lam = 1.0
            level = fiber.breakdown.I
            history.append((level, rn))
            polish = False
            if rn <= tol:
                break
            continue
        gradient = res if lam == 1.0 else lam * dilate(res, spec, 1.0 / lam)
        direction = invert_helmholtz(gradient, spec, params.omega)
        slope = float(np.real(np.vdot(direction, gradient))) * spec.cell_volume
        accepted = False
        while step > 1e-12:
            trial = u - step * direction
            trial_fiber = Fiber(analyse(trial, params.p, profile, route, spec), params)
            trial_lam = local_projection(trial_fiber, lam)
            trial_level = trial_fiber(trial_lam)[0]
            if trial_level <= level - 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise StagnationError(f"no descent step found at residual {rn:.3e}")
        stalled = stalled + 1 if trial_level >= level else 0
        if stalled >= stagnation_window:
            raise StagnationError("action level did not decrease for too many iterations")
        u, fiber, lam, level = trial, trial_fiber, trial_lam, trial_level
        if abs(lam - 1.0) > rescale_gap:
            # Resampling restarts the monotone sequence at the rescaled state's own level.
            u = dilate(u, spec, lam)
            fiber = Fiber(analyse(u, params.p, profile, route, spec), params)
            lam = local_projection(fiber)
            level = fiber(lam)[0]
        log.debug("action iter %d: level %.12g residual %.3e step %.3g lambda %.6f", iterations, level, rn, step, lam)
        step = min(2.0 * step, 4.0)
        if time_limit is not None and time.monotonic() - start > time_limit:
            raise ConvergenceError("action solve exceeded its time limit")
    else:
        hint = f"; best residual {best_rn:.3e}, a floor this high means the grid does not resolve the state" \
            if since_best >= floor_window else ""
        raise ConvergenceError(f"action solve did not converge in {max_iter} iterations (residual {rn:.3e}){hint}")
    s = analyse(u, params.p, profile, route, spec)
    b = assemble(s, params)
    rn = relative_norm(residual_values(s, params), s, params.omega)
    return SolveReport(Field(spec, u), iterations, rn, b, sigma=b.I, omega_mu=params.omega,
                       history=history, converged=rn <= tol, notes=notes)


def _polish(u, params, profile, route, spec, target, notes):
    real, phase, lost = real_phase(u)
    polished, _, steps = newton_polish(real, params, profile, spec, route, target=target)
    notes.append(f"newton polish: {len(steps) - 1} steps, residual {steps[0]:.2e} -> {steps[-1]:.2e}, "
                 f"discarded imaginary part {lost:.1e}")
    values = polished * phase if np.iscomplexobj(u) else polished
    return values, steps[-1]
