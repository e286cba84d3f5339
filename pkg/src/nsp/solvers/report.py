"""Result container shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..functionals import FunctionalBreakdown
from ..grid import Field


@dataclass
class SolveReport:
    state: Field | np.ndarray
    iterations: int
    residual_norm: float
    breakdown: FunctionalBreakdown | None
    sigma: float | None = None
    c_mu: float | None = None
    omega_mu: float | None = None
    history: list[tuple[float, float]] = field(default_factory=list)
    converged: bool = True
    notes: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "sigma": self.sigma,
            "c_mu": self.c_mu,
            "omega_mu": self.omega_mu,
            "notes": list(self.notes),
        }
        if self.breakdown is not None:
            out["breakdown"] = self.breakdown.to_dict()
        return out
