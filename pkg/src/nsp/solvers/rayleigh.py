"""Lowest Rayleigh quotient of ``-Lap + V`` on the box.

The default Dirichlet box (sine series on the cell centres) gives an upper
bound of the whole-space infimum; the periodic box is available for
comparison.

Preconditioned projected gradient: the residual ``H u - q u`` is smoothed by
``(s - Lap)^{-1}`` and the next iterate is the best Ritz vector in the span
of the current iterate, the smoothed residual and the previous step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla
from scipy import optimize

from ..errors import ConvergenceError, InputDomainError, ParameterError
from ..grid import Field, GridSpec, invert_helmholtz, laplacian_values

log = logging.getLogger(__name__)


@dataclass
class RayleighResult:
    value: float
    state: Field
    iterations: int
    residual_norm: float
    history: list[float] = field(default_factory=list)


BOUNDARIES = ("dirichlet", "periodic")


def first_box_eigenvalue(spec: GridSpec, boundary: str = "dirichlet") -> float:
    """Lowest eigenvalue of ``-Lap`` on the box (nonzero one when periodic)."""
    _check_boundary(boundary)
    if boundary == "dirichlet":
        return 3.0 * (math.pi / (2.0 * spec.half_width)) ** 2
    return (math.pi / spec.half_width) ** 2


def _check_boundary(boundary: str) -> None:
    if boundary not in BOUNDARIES:
        raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")


def _dirichlet_symbol(spec: GridSpec) -> np.ndarray:
    k = np.pi * np.arange(1, spec.n + 1) / (2.0 * spec.half_width)
    return k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2


def _operators(spec: GridSpec, boundary: str):
    """``-Lap`` and ``(s - Lap)^{-1}`` for the chosen boundary condition."""
    if boundary == "periodic":
        return (lambda v: -laplacian_values(v, spec)), (lambda v, s: invert_helmholtz(v, spec, s))
    symbol = _dirichlet_symbol(spec)

    def minus_laplacian(v):
        return sfft.idstn(symbol * sfft.dstn(v, type=2), type=2)

    def smooth(v, s):
        return sfft.idstn(sfft.dstn(v, type=2) / (s + symbol), type=2)

    return minus_laplacian, smooth


def quadratic_form_infimum(potential: Field, tol: float = 1e-9, max_iter: int = 2000, seed: int = 0,
                           boundary: str = "dirichlet") -> RayleighResult:
    """Infimum of ``int |grad u|^2 + V u^2`` over ``||u||_2 = 1``.

    The start is a Gaussian at the potential minimum plus a seeded
    perturbation; ``tol`` bounds the residual norm relative to ``1 + |q|``.
    """
    if not isinstance(potential, Field) or not potential.is_real:
        raise InputDomainError("potential must be a real Field")
    if not tol > 0 or max_iter < 1:
        raise ParameterError("tol must be positive and max_iter at least 1")
    _check_boundary(boundary)
    spec = potential.spec
    V = np.asarray(potential.values)
    dv = spec.cell_volume
    minus_laplacian, smooth = _operators(spec, boundary)
    apply_H = lambda v: minus_laplacian(v) + V * v
    inner = lambda a, b: float(np.sum(a * b)) * dv
    shift = max(1.0, float(np.max(V)) - float(np.min(V))) if np.ptp(V) > 0 else 1.0

    rng = np.random.default_rng(seed)
    x, y, z = spec.mesh()
    i, j, k = np.unravel_index(int(np.argmin(V)), spec.shape)
    centre = spec.axis[[i, j, k]] if np.ptp(V) > 0 else np.zeros(3)
    width = 0.25 * spec.half_width
    r2 = (x - centre[0]) ** 2 + (y - centre[1]) ** 2 + (z - centre[2]) ** 2
    u = np.exp(-r2 / (2 * width * width)) + 1e-3 * rng.standard_normal(spec.shape)
    u /= math.sqrt(inner(u, u))
    Hu = apply_H(u)
    q = inner(u, Hu)
    previous = None
    history = [q]
    rn = float("inf")
    for it in range(1, max_iter + 1):
        res = Hu - q * u
        rn = math.sqrt(inner(res, res)) / (1.0 + abs(q))
        if rn <= tol:
            return RayleighResult(q, Field(spec, u), it, rn, history)
        basis = [u, smooth(res, shift)]
        if previous is not None:
            basis.append(previous)
        Q, _ = np.linalg.qr(np.stack([b.ravel() for b in basis], axis=1))
        Q = Q.T.reshape((-1,) + spec.shape)
        HQ = [apply_H(b) for b in Q]
        h = np.array([[inner(a, b) for b in HQ] for a in Q])
        values, vectors = sla.eigh(0.5 * (h + h.T))
        c = vectors[:, 0]
        new = np.tensordot(c, Q, axes=1) / math.sqrt(dv)
        new_H = np.tensordot(c, np.stack(HQ), axes=1) / math.sqrt(dv)
        previous = new - inner(new, u) * u
        u, Hu, q = new, new_H, float(values[0]) / dv
        history.append(q)
        log.debug("rayleigh iter %d: q %.12g residual %.3e", it, q, rn)
    raise ConvergenceError(f"Rayleigh quotient did not converge in {max_iter} iterations (residual {rn:.3e})")


def square_well_ground_energy(depth: float, radius: float) -> float:
    """Bound-state energy ``-kappa^2`` of ``-V0`` on a ball by radial shooting.

    Matches ``k cot(k R) = -kappa`` with ``k^2 + kappa^2 = V0``; returns 0 when
    the well is too shallow to bind.
    """
    if not (depth > 0 and radius > 0):
        raise InputDomainError("depth and radius must be positive")
    k_max = math.sqrt(depth)
    if k_max * radius <= math.pi / 2:
        return 0.0
    mismatch = lambda k: k / math.tan(k * radius) + math.sqrt(depth - k * k)
    lo, hi = math.pi / (2 * radius) + 1e-14, min(k_max, math.pi / radius - 1e-12)
    k = optimize.brentq(mismatch, lo, hi, xtol=1e-15)
    return -(depth - k * k)
