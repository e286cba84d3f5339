"""Undoped reference problems: the mass threshold and the energy/action roundtrip.

Without doping the constrained infimum has an exact scaling law.  Writing
``u(x) = k v(s x)`` with ``k = s^2/e`` and ``s = e^{(p-1)/(2(p-2))}`` turns
the problem with charge ``e`` into the one with ``e = 1`` and multiplies the
mass by ``s/e^2``; lengths scale by ``1/s``.  The Gaussian trial family gives
closed-form energies that size boxes and bracket the threshold.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..doping import GaussianProfile, ZeroProfile
from ..errors import BracketError, ConvergenceError, ParameterError, StagnationError
from ..functionals import PhysParams, analyse, require_exponent
from ..grid import Field, GridSpec, RadialGrid
from .action import solve_action_gss
from .energy import MASS_CRITICAL, energy_value, solve_energy_gss
from .radial import RadialState, solve_radial_energy
from .report import SolveReport

log = logging.getLogger(__name__)


def gaussian_trial_terms(mu: float, a: float, e: float, p: float) -> dict:
    """Primitives of ``sqrt(mu) (2a/pi)^{3/4} exp(-a r^2)`` without doping."""
    peak2 = (2 * a / math.pi) ** 1.5
    A = 3 * a * mu
    C = mu ** (0.5 * (p + 1)) * peak2 ** (0.5 * (p + 1)) * (2 * math.pi / ((p + 1) * 2 * a)) ** 1.5
    D = mu**2 * GaussianProfile(peak2, 2 * a).self_energy()
    E = A / 2 - C / (p + 1) + e * e * D
    return {"A": A, "B": mu, "C": C, "D": D, "E": E, "omega": (C - A - 4 * e * e * D) / mu}


def _ratio_minimiser(mu: float, p: float) -> float:
    """Width parameter minimising ``(A/2 - C/(p+1)) / sqrt(a)`` over the trial family.

    With ``A ~ a``, ``C ~ a^q`` (``q = 3(p-1)/4``) and ``D ~ sqrt(a)`` this is
    where the trial energy can first turn negative.
    """
    q = 0.75 * (p - 1)
    unit = gaussian_trial_terms(1.0, 1.0, 0.0, p)
    stiffness = mu ** (0.5 * (p + 1)) * unit["C"] / (p + 1) / mu
    return (stiffness * (q - 0.5) / 0.75) ** (1.0 / (1.0 - q))


def gaussian_trial_minimum(mu: float, e: float, p: float) -> tuple[float, float]:
    """``(a, E)`` at the best Gaussian trial of mass ``mu``.

    Below the trial threshold the infimum is the spreading limit ``E -> 0+``;
    the returned width is then the finite local minimiser closest to that branch.
    """
    centre = _ratio_minimiser(mu, p)
    grid = centre * np.geomspace(1e-8, 1e8, 1601)
    energies = np.array([gaussian_trial_terms(mu, a, e, p)["E"] for a in grid])
    i = int(np.argmin(energies))
    lo, hi = math.log(grid[max(i - 1, 0)]), math.log(grid[min(i + 1, grid.size - 1)])
    if energies[i] >= 0.0:
        # Spreading branch: report the local well of E/sqrt(a) instead.
        ratio = energies / np.sqrt(grid)
        i = int(np.argmin(ratio))
        return float(grid[i]), float(energies[i])
    res = optimize.minimize_scalar(lambda t: gaussian_trial_terms(mu, math.exp(t), e, p)["E"],
                                   bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(math.exp(res.x)), float(res.fun)


def gaussian_threshold(e: float, p: float) -> float:
    """Smallest mass at which the best Gaussian trial energy is negative."""
    require_exponent(p, 2.0, MASS_CRITICAL)
    if e == 0.0:
        return 0.0
    return math.exp(optimize.brentq(_well_depth, -12.0, 12.0, args=(p,), xtol=1e-14, rtol=1e-14)) * mass_scale(e, p)


def mass_scale(e: float, p: float) -> float:
    """Factor ``s/e^2`` mapping undoped masses at ``e = 1`` to charge ``e``."""
    return e ** ((p - 1) / (2 * (p - 2))) / (e * e)


def length_scale(e: float, p: float) -> float:
    """Factor ``1/s`` mapping undoped lengths at ``e = 1`` to charge ``e``."""
    return e ** (-(p - 1) / (2 * (p - 2)))


def _well_depth(log_mu: float, p: float) -> float:
    """Sign-carrying depth of the trial well at ``e = 1``."""
    mu = math.exp(log_mu)
    a = _ratio_minimiser(mu, p)
    objective = lambda t: gaussian_trial_terms(mu, a * math.exp(t), 1.0, p)["E"] / math.sqrt(a * math.exp(t))
    res = optimize.minimize_scalar(objective, bounds=(-20.0, 20.0), method="bounded", options={"xatol": 1e-12})
    return res.fun / (mu * math.sqrt(a))


def threshold_box(mu: float, e: float, p: float, n: int, decay_lengths: float = 8.0) -> GridSpec:
    """Box sized from the Gaussian trial at mass ``mu``."""
    a, _ = gaussian_trial_minimum(mu, e, p)
    terms = gaussian_trial_terms(mu, a, e, p)
    width = 1.0 / math.sqrt(a)
    decay = 1.0 / math.sqrt(terms["omega"]) if terms["omega"] > 0 else width
    return GridSpec(n, max(decay_lengths * decay, 5 * width))


def gaussian_state(spec: GridSpec, mu: float, a: float) -> Field:
    x, y, z = spec.mesh()
    return Field(spec, math.sqrt(mu) * (2 * a / math.pi) ** 0.75 * np.exp(-a * (x * x + y * y + z * z)))


@dataclass
class MuStarEstimate:
    mu_star: float
    bracket: tuple[float, float]
    probes: list[tuple[float, float]] = field(default_factory=list)
    monotone: bool = True
    trial_threshold: float = float("nan")


def threshold_radial_grid(mu: float, e: float, p: float, intervals: int = 1200,
                          widths: float = 40.0) -> RadialGrid:
    """Radial grid reaching ``widths`` Gaussian-trial widths at mass ``mu``."""
    a, _ = gaussian_trial_minimum(mu, e, p)
    return RadialGrid(intervals, widths / math.sqrt(a))


def infimum_sign_energy(mu: float, e: float, p: float, grid: RadialGrid, tol: float = 1e-8,
                        max_iter: int = 20000) -> float:
    """``min(E, 0)`` along the undoped radial energy descent at mass ``mu``.

    The descent starts from the best Gaussian trial and stops at the first
    negative energy; a flow that settles at positive energy or stalls loses
    to the zero competitor.
    """
    a, _ = gaussian_trial_minimum(mu, e, p)
    a = max(a, 16.0 / grid.r_max**2)
    r = grid.r
    init = RadialState(grid, r * math.sqrt(mu) * (2 * a / math.pi) ** 0.75 * np.exp(-a * r * r))
    try:
        d, _ = solve_radial_energy(mu, e, p, init, ZeroProfile(), tol=tol, max_iter=max_iter,
                                   stop_when_negative=True)
        energy = d.energy(e)
    except (StagnationError, ConvergenceError) as exc:
        log.debug("radial flow at mu=%g ended without convergence: %s", mu, exc)
        energy = 0.0
    return min(energy, 0.0)


def estimate_mu_star(e: float, p: float, tol: float = 1e-3, probes: int = 5,
                     bracket: tuple[float, float] | None = None, intervals: int = 1200,
                     widths: float = 40.0) -> MuStarEstimate:
    """Bisection on the sign of the undoped constrained infimum.

    ``tol`` is the relative width of the final bracket.  The flows run on a
    radial grid sized at the upper end of the bracket: a periodic box would
    admit near-uniform states of negative energy at every mass.
    """
    require_exponent(p, 2.0, MASS_CRITICAL)
    if not e > 0:
        raise ParameterError("the mass threshold needs e > 0")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    trial = gaussian_threshold(e, p)
    lo, hi = bracket if bracket is not None else (0.25 * trial, 1.05 * trial)
    if not 0 < lo < hi:
        raise ParameterError("bracket must satisfy 0 < lo < hi")
    grid = threshold_radial_grid(hi, e, p, intervals, widths)
    sign = lambda m: infimum_sign_energy(m, e, p, grid)
    samples = np.linspace(lo, hi, probes)
    values = [sign(m) for m in samples]
    scale = max(1.0, max(abs(v) for v in values))
    monotone = bool(np.all(np.diff(values) <= 1e-12 * scale))
    if not (values[-1] < 0 and values[0] == 0.0):
        raise BracketError(f"no sign change of the infimum on [{lo:.6g}, {hi:.6g}]")
    lo = max(m for m, v in zip(samples, values) if v == 0)
    hi = min(m for m, v in zip(samples, values) if v < 0)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if sign(mid) < 0:
            hi = mid
        else:
            lo = mid
    return MuStarEstimate(0.5 * (lo + hi), (lo, hi), list(zip(samples.tolist(), values)), monotone, trial)


def roundtrip_threshold(mu_star: float, p: float) -> float:
    """Masses above ``2 * 2^{1/(2p-4)} * mu_star`` are in the roundtrip regime."""
    return 2.0 * 2.0 ** (1.0 / (2 * p - 4)) * mu_star


@dataclass
class RoundtripReport:
    mu: float
    energy_report: SolveReport
    action_report: SolveReport
    mass_gap: float
    energy_gap: float
    action_gap: float

    @property
    def relative_mass_gap(self) -> float:
        return self.mass_gap / self.mu

    @property
    def relative_energy_gap(self) -> float:
        return self.energy_gap / abs(self.energy_report.c_mu)


def roundtrip_energy_action(mu: float, e: float, p: float, profile, tol: float = 1e-6, n: int = 64,
                        spec: GridSpec | None = None) -> RoundtripReport:
    """Energy ground state, then the action ground state at its multiplier.

    Both solves start from the best Gaussian trial of mass ``mu``; the action
    solve never sees the energy state.
    """
    require_exponent(p, 2.0, MASS_CRITICAL)
    spec = threshold_box(mu, e, p, n) if spec is None else spec
    a, _ = gaussian_trial_minimum(mu, e, p)
    trial = gaussian_state(spec, mu, a)
    energy_rep = solve_energy_gss(mu, e, p, profile, trial, tol=tol)
    if not energy_rep.omega_mu > 0:
        raise ConvergenceError("energy ground state has a nonpositive multiplier")
    params = PhysParams(energy_rep.omega_mu, e, p)
    action_rep = solve_action_gss(params, profile, trial, tol=tol)
    w = action_rep.state
    s_w = analyse(w, p, profile)
    s_u = analyse(energy_rep.state, p, profile)
    mass_gap = abs(s_w.B - mu)
    energy_gap = abs(energy_value(s_w, e) - energy_value(s_u, e))
    action_u = energy_value(s_u, e) + 0.5 * params.omega * s_u.B
    action_gap = abs(action_rep.sigma - action_u)
    return RoundtripReport(mu, energy_rep, action_rep, mass_gap, energy_gap, action_gap)
