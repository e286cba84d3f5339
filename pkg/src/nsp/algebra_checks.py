"""Finite-dimensional algebra behind the natural-constraint argument.

At a constrained critical point of ``I`` on the Nehari-Pohozaev set the four
primitives ``(A, B, C, D)`` satisfy a linear system whose right-hand side is a
linear image of ``(I, e^2 E1, e^2 E2, e^2 E3)``.  This module builds those
systems, compares the determinant with its closed form, and solves for the
closed-form ``D`` and ``C`` expressions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SingularSystemError
from .functionals import FunctionalBreakdown


@dataclass(frozen=True)
class LambdaMatrix:
    p: float
    omega: float
    e: float
    mu: float

    @property
    def entries(self) -> np.ndarray:
        p, w, e2, mu = self.p, self.omega, self.e**2, self.mu
        q = p + 1
        return np.array([
            [0.5, w / 2, -1 / q, e2],
            [1.5, w / 2, -(2 * p - 1) / q, 3 * e2],
            [3 * mu - 1, (mu - 1) * w, 1 - (2 * p - 1) * mu, (12 * mu - 4) * e2],
            [(3 * mu - 1) / 2, 3 * (mu - 1) * w / 2, -(3 * (2 * p - 1) * mu - 3) / q, (15 * mu - 5) * e2],
        ])

    @property
    def rhs_map(self) -> np.ndarray:
        """Maps ``(I, e^2 E1, e^2 E2, e^2 E3)`` to the right-hand side."""
        mu = self.mu
        return np.array([
            [1.0, -2.0, 0.0, 0.0],
            [0.0, 2.0, -1.0, 0.0],
            [0.0, 4 + 4 * mu, -2 * mu, 0.0],
            [0.0, 10 + 10 * mu, -(1 + 7 * mu), -mu],
        ])

    def closed_form_det(self) -> float:
        p, w, e2, mu = self.p, self.omega, self.e**2, self.mu
        return 4 * (p - 2) * (p - 1) * e2 * w / (p + 1) * mu * (3 * mu - 1)


def lambda_matrix(p: float, omega: float, e: float, mu: float) -> LambdaMatrix:
    return LambdaMatrix(p, omega, e, mu)


def det_lambda(p: float, omega: float, e: float, mu: float) -> tuple[float, float, float]:
    """``(numeric det, closed-form det, |gap|)``."""
    m = LambdaMatrix(p, omega, e, mu)
    numeric = float(np.linalg.det(m.entries))
    closed = m.closed_form_det()
    return numeric, closed, abs(numeric - closed)


def det_gap_relative(p: float, omega: float, e: float, mu: float) -> float:
    """Determinant gap relative to ``max(1, |det|)``."""
    numeric, closed, gap = det_lambda(p, omega, e, mu)
    return gap / max(1.0, abs(closed))


def stationarity_matrix(p: float, omega: float, e: float) -> np.ndarray:
    """Coefficients of ``(A, B, C, D)`` in ``I - 2e^2E1``, ``J_inf``, ``J'(u)u`` and ``Q``."""
    e2, q = e**2, p + 1
    return np.array([
        [0.5, omega / 2, -1 / q, e2],
        [1.5, omega / 2, -(2 * p - 1) / q, 3 * e2],
        [3.0, omega, -(2 * p - 1), 12 * e2],
        [1.5, 1.5 * omega, -3 * (2 * p - 1) / q, 15 * e2],
    ])


def stationarity_rhs_map() -> np.ndarray:
    """Maps ``(I, e^2 E1, e^2 E2, e^2 E3)`` to the right-hand side when ``J = J'(u)u = Q = 0``."""
    return np.array([
        [1.0, -2.0, 0.0, 0.0],
        [0.0, 2.0, -1.0, 0.0],
        [0.0, 4.0, -2.0, 0.0],
        [0.0, 10.0, -7.0, -1.0],
    ])


def closed_form_D(I: float, e2E1: float, e2E2: float, e2E3: float, p: float, e: float) -> float:
    """``D`` solved from the system; the bracket determines ``e^2 D``."""
    if e == 0.0:
        raise SingularSystemError("D is undetermined at e = 0", pivot_row=None)
    return (2 * p - 1) / (24 * (p - 2)) * (16 * e2E1 - 7 * e2E2 - e2E3 - 3 * I) / e**2


def closed_form_C(I: float, e2E1: float, e2E2: float, e2E3: float, p: float) -> float:
    return (p + 1) / (4 * (p - 1) * (p - 2)) * (16 * e2E1 - 7 * e2E2 - e2E3 - 3 * I)


@dataclass(frozen=True)
class System38Solution:
    A: float
    B: float
    C: float
    D: float
    D_closed: float
    C_closed: float

    @property
    def D_gap(self) -> float:
        return abs(self.D - self.D_closed) / max(1.0, abs(self.D_closed))

    @property
    def C_gap(self) -> float:
        return abs(self.C - self.C_closed) / max(1.0, abs(self.C_closed))


def _solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    singular, row = singular_pivot(matrix)
    if singular:
        raise SingularSystemError("coefficient matrix is singular", pivot_row=row)
    return refined_solve(matrix, rhs)


def refined_solve(matrix: np.ndarray, rhs: np.ndarray, steps: int = 3) -> np.ndarray:
    """Row/column-equilibrated LU solve with residuals accumulated in extended precision.

    The synthetic systems reach condition numbers near 1e5, so a plain
    double-precision solve loses about five digits; refinement recovers them.
    """
    m = np.asarray(matrix, dtype=float)
    wide_b = np.asarray(rhs).astype(np.longdouble)
    b = np.asarray(wide_b, dtype=float)
    rows = 1.0 / np.max(np.abs(m), axis=1)
    cols = 1.0 / np.max(np.abs(m * rows[:, None]), axis=0)
    scaled = m * rows[:, None] * cols[None, :]
    lu = sla.lu_factor(scaled)
    wide_m = m.astype(np.longdouble)
    x = cols * sla.lu_solve(lu, rows * b)
    for _ in range(steps):
        residual = np.asarray(wide_b - wide_m @ x.astype(np.longdouble), dtype=float)
        x = x + cols * sla.lu_solve(lu, rows * residual)
    return x


def solve_from_sources(matrix: np.ndarray, rhs_map: np.ndarray, sources, p: float, e: float) -> System38Solution:
    """Solve for ``(A, B, C, D)`` given ``(I, e^2E1, e^2E2, e^2E3)``."""
    sources = np.asarray(sources, dtype=float)
    A, B, C, D = _solve(matrix, rhs_map @ sources)
    return System38Solution(A, B, C, D, closed_form_D(*sources, p, e), closed_form_C(*sources, p))


def solve_stationarity_system(b: FunctionalBreakdown, p: float | None = None, omega: float | None = None,
                    e: float | None = None) -> System38Solution:
    """Recover ``(A, B, C, D)`` of a state from its ``I`` and doping integrals."""
    p = b.p if p is None else p
    omega = b.omega if omega is None else omega
    e = b.e if e is None else e
    e2 = e**2
    sources = (b.I, e2 * b.E1, e2 * b.E2, e2 * b.E3)
    return solve_from_sources(stationarity_matrix(p, omega, e), stationarity_rhs_map(), sources, p, e)


def round_trip_gap(matrix: np.ndarray, unknowns) -> float:
    """Relative error of recovering ``unknowns`` from ``matrix @ unknowns``."""
    x = np.asarray(unknowns, dtype=float)
    recovered = _solve(matrix, np.asarray(matrix).astype(np.longdouble) @ x.astype(np.longdouble))
    return float(np.max(np.abs(recovered - x)) / max(1.0, np.max(np.abs(x))))


def singular_pivot(matrix: np.ndarray, rtol: float = 1e-12) -> tuple[bool, int | None]:
    """Rank deficiency test and the row that row reduction would zero out.

    The row is the last one with a nonzero weight in the left null vector.
    """
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[-1] > rtol * s[0]:
        return False, None
    return True, int(np.nonzero(np.abs(left_null_vector(matrix)) > 1e-10)[0][-1])


def left_null_vector(matrix: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(matrix)
    return u[:, -1]


def pivot_coefficients(p: float, omega: float, e: float, mu: float = 1.0 / 3.0) -> np.ndarray:
    """Coefficients on ``(I, e^2E1, e^2E2, e^2E3)`` of the row that reduces to zero.

    Normalised so the ``I`` coefficient equals 3.
    """
    m = LambdaMatrix(p, omega, e, mu)
    y = left_null_vector(m.entries)
    combo = y @ m.rhs_map
    if abs(combo[0]) < 1e-14:
        raise SingularSystemError("reduced row has no I component", pivot_row=None)
    return combo * (3.0 / combo[0])


def singular_mus(p: float, omega: float, e: float) -> list[float]:
    """Values of ``mu`` where the closed-form determinant vanishes."""
    if e == 0.0 or p in (1.0, 2.0):
        raise SingularSystemError("determinant vanishes identically", pivot_row=None)
    return [0.0, 1.0 / 3.0]


def detect_singularities(p: float, omega: float, e: float, mus) -> dict[float, tuple[bool, int | None]]:
    """Numerical singularity test of the system at each ``mu``."""
    return {float(mu): singular_pivot(LambdaMatrix(p, omega, e, mu).entries) for mu in mus}


def random_det_draws(count: int, seed: int = 0) -> np.ndarray:
    """Relative determinant gaps on random ``p in (2,5)``, ``omega, e, mu in (0,10)``."""
    rng = np.random.default_rng(seed)
    gaps = np.empty(count)
    for i in range(count):
        p = rng.uniform(2, 5)
        omega, e, mu = rng.uniform(0, 10, size=3)
        gaps[i] = det_gap_relative(p, omega, e, mu)
    return gaps
