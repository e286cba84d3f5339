"""Functionals of the doped Schroedinger-Poisson problem at a single state.

Primitive integrals::

    A = ||grad u||^2, B = ||u||^2, C = ||u||_{p+1}^{p+1}, D = (1/4) int S0 |u|^2,
    E1 = (1/4) int S1 |u|^2, E2 = (1/2) int S2 |u|^2, E3 = (1/2) int S3 |u|^2

feed every derived quantity (I, N, P, J, Q, K, ...) through fixed linear
combinations.  E1, E2 and E3 are evaluated on the potential side, which is
exact for radial profiles; ball unions use surface forms for E2 and E3.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .doping import BallUnion, surface_E2_E3
from .errors import DegenerateStateError, ParameterError
from .grid import Field, GridSpec, kinetic_integral, laplacian_values
from .poisson import coulomb_values, profile_potentials


@dataclass(frozen=True)
class PhysParams:
    omega: float
    e: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ParameterError(f"omega must be positive, got {self.omega!r}")
        if not (np.isfinite(self.e) and self.e >= 0):
            raise ParameterError(f"e must be nonnegative, got {self.e!r}")
        require_exponent(self.p)

    def with_omega(self, omega: float) -> "PhysParams":
        return PhysParams(omega, self.e, self.p)


def require_exponent(p: float, low: float = 1.0, high: float = 5.0) -> None:
    if not (np.isfinite(p) and low < p < high):
        raise ParameterError(f"exponent p={p!r} outside ({low}, {high})")


@dataclass(frozen=True, eq=False)
class StateData:
    """A state together with its Coulomb potential and primitive integrals."""

    spec: GridSpec
    values: np.ndarray
    density: np.ndarray
    S0: np.ndarray
    S1: np.ndarray
    A: float
    B: float
    C: float
    D: float
    E1: float
    E2: float
    E3: float
    F: float
    p: float
    profile: object
    route: str


def analyse(u: Field | np.ndarray, p: float, profile, route: str = "exact", spec: GridSpec | None = None) -> StateData:
    """Compute ``S0(u)`` and all primitive integrals once."""
    if isinstance(u, Field):
        spec, values = u.spec, u.values
    else:
        values = np.asarray(u)
    require_exponent(p)
    dv = spec.cell_volume
    density = np.abs(values) ** 2
    S0 = coulomb_values(density, spec)
    S1, S2, S3 = profile_potentials(profile, spec, route)
    A = kinetic_integral(values, spec)
    B = float(density.sum() * dv)
    C = float(np.sum(density ** (0.5 * (p + 1.0))) * dv)
    D = 0.25 * float(np.sum(S0 * density) * dv)
    E1 = 0.25 * float(np.sum(S1 * density) * dv)
    if isinstance(profile, BallUnion):
        E2, E3 = surface_E2_E3(Field(spec, S0), profile)
    else:
        E2 = 0.5 * float(np.sum(S2 * density) * dv)
        E3 = 0.5 * float(np.sum(S3 * density) * dv)
    return StateData(spec, values, density, S0, S1, A, B, C, D, E1, E2, E3,
                     profile_self_energy(profile), p, profile, route)


@lru_cache(maxsize=64)
def profile_self_energy(profile) -> float:
    """``F = -(1/4) int S1 rho``, cached per profile."""
    return float(profile.self_energy())


@dataclass(frozen=True)
class FunctionalBreakdown:
    A: float
    B: float
    C: float
    D: float
    E1: float
    E2: float
    E3: float
    F: float
    I: float
    script_I: float
    E_energy: float
    N: float
    P: float
    J: float
    Q: float
    K: float
    J_prime: float
    I_inf: float
    J_inf: float
    K_inf: float
    omega: float
    e: float
    p: float

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def scale(self) -> float:
        """Magnitude used to normalise identity defects."""
        return abs(self.A) + abs(self.omega * self.B) + abs(self.C)


def assemble(s: StateData, params: PhysParams) -> FunctionalBreakdown:
    """All derived functionals from the primitives, each by its own formula."""
    A, B, C, D, E1, E2, E3 = s.A, s.B, s.C, s.D, s.E1, s.E2, s.E3
    w, e2, p = params.omega, params.e**2, params.p
    if abs(p - s.p) > 0.0:
        raise ParameterError("state primitives were computed for a different exponent")
    q = p + 1.0
    I_inf = A / 2 + w * B / 2 - C / q + e2 * D
    I = I_inf + 2 * e2 * E1
    E_energy = A / 2 - C / q + e2 * D + 2 * e2 * E1
    N = A + w * B - C + 4 * e2 * D + 4 * e2 * E1
    P = A / 2 + 3 * w * B / 2 - 3 * C / q + 5 * e2 * D + 10 * e2 * E1 - e2 * E2
    J_inf = 3 * A / 2 + w * B / 2 - (2 * p - 1) * C / q + 3 * e2 * D
    J = J_inf - 2 * e2 * E1 + e2 * E2
    Q = (3 * A / 2 + 3 * w * B / 2 - 3 * (2 * p - 1) * C / q + 15 * e2 * D
         - 10 * e2 * E1 + 7 * e2 * E2 + e2 * E3)
    K_inf = w * B / 3 + 2 * (p - 2) * C / (3 * q)
    K = K_inf + 8 * e2 * E1 / 3 - e2 * E2 / 3
    J_prime = 3 * A + w * B - (2 * p - 1) * C + 12 * e2 * D - 4 * e2 * E1 + 2 * e2 * E2
    return FunctionalBreakdown(
        A=A, B=B, C=C, D=D, E1=E1, E2=E2, E3=E3, F=s.F, I=I, script_I=I + e2 * s.F,
        E_energy=E_energy, N=N, P=P, J=J, Q=Q, K=K, J_prime=J_prime,
        I_inf=I_inf, J_inf=J_inf, K_inf=K_inf, omega=w, e=params.e, p=p,
    )


def breakdown(u: Field, params: PhysParams, profile, route: str = "exact") -> FunctionalBreakdown:
    """Full functional vector at ``u``."""
    return assemble(analyse(u, params.p, profile, route), params)


def nonlinearity(values: np.ndarray, p: float) -> np.ndarray:
    """``|u|^{p-1} u`` with ``|0|^{p-1} * 0 := 0``."""
    mag = np.abs(values)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(mag > 0.0, mag ** (p - 1.0), 0.0)
    return factor * values


def residual_values(s: StateData, params: PhysParams) -> np.ndarray:
    """Strong-form Euler-Lagrange residual of ``I`` at the analysed state."""
    u = s.values
    e2 = params.e**2
    return (-laplacian_values(u, s.spec) + params.omega * u
            + e2 * (s.S0 + s.S1) * u - nonlinearity(u, params.p))


def relative_norm(residual: np.ndarray, s: StateData, omega: float) -> float:
    """``||res||_2 / ((|w| + A/B) ||u||_2)``: invariant under the mass-preserving scalings."""
    if s.B == 0.0:
        return 0.0
    scale = abs(omega) + s.A / s.B
    return float(np.sqrt(np.sum(np.abs(residual) ** 2) * s.spec.cell_volume / s.B) / scale)


def el_residual(u: Field, params: PhysParams, profile, route: str = "exact") -> tuple[Field, float]:
    """Residual field and its scale-free norm."""
    s = analyse(u, params.p, profile, route)
    res = residual_values(s, params)
    return Field(u.spec, res), relative_norm(res, s, params.omega)


def omega_from_state(s: StateData, e: float) -> float:
    if s.B <= 0.0:
        raise DegenerateStateError("omega is undefined for a state with zero mass")
    e2 = e * e
    return (s.C - s.A - 4 * e2 * s.D - 4 * e2 * s.E1) / s.B


def omega_from_nehari(u: Field, e: float, p: float, profile, route: str = "exact") -> float:
    """The frequency making the Nehari functional vanish at ``u``."""
    return omega_from_state(analyse(u, p, profile, route), e)


def pivot_combination(b: FunctionalBreakdown) -> float:
    """``3I + (16/3)e^2 E1 - (7/3)e^2 E2 - (1/3)e^2 E3``."""
    e2 = b.e**2
    return 3 * b.I + (16 / 3) * e2 * b.E1 - (7 / 3) * e2 * b.E2 - (1 / 3) * e2 * b.E3


def manifold_energy_identity(b: FunctionalBreakdown) -> tuple[float, float]:
    """Both sides of ``(2p-1) I = (p-2)A + (p-1) w B + 2(p-2)e^2 D + 4p e^2 E1 - e^2 E2``.

    Holds whenever ``J = 0``.
    """
    p, e2 = b.p, b.e**2
    lhs = (2 * p - 1) * b.I
    rhs = ((p - 2) * b.A + (p - 1) * b.omega * b.B + 2 * (p - 2) * e2 * b.D
           + 4 * p * e2 * b.E1 - e2 * b.E2)
    return lhs, rhs


def modulus_gradient_gap(u: Field) -> tuple[float, float, float]:
    """``(||grad |u| ||_2, ||grad u||_2, relative gap)``; equal norms mean a constant phase."""
    grad_u = math.sqrt(kinetic_integral(np.asarray(u.values), u.spec))
    grad_mod = math.sqrt(kinetic_integral(np.abs(u.values), u.spec))
    return grad_mod, grad_u, abs(grad_u - grad_mod) / grad_u if grad_u > 0 else 0.0
