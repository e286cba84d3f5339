"""Deterministic random test states: sums of one to three complex Gaussians."""

from __future__ import annotations

import numpy as np

from ..errors import InputDomainError
from ..grid import Field, GridSpec, boundary_shell_fraction

SHELL_LIMIT = 1e-8


def random_corpus(seed: int, count: int, spec: GridSpec, mass_range: tuple[float, float] = (0.05, 50.0)) -> list[Field]:
    """``count`` states whose mass is log-uniform in ``mass_range``.

    Centres and widths are drawn so every state keeps at most ``1e-8`` of its
    mass in ``|x| > L/2``; draws violating that are discarded and redrawn
    from the same stream, so the corpus depends only on ``(seed, count, spec)``.
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise InputDomainError(f"count must be a positive integer, got {count!r}")
    lo, hi = mass_range
    if not 0 < lo < hi:
        raise InputDomainError("mass_range must satisfy 0 < lo < hi")
    rng = np.random.default_rng(seed)
    L = spec.half_width
    x, y, z = spec.mesh()
    states = []
    while len(states) < count:
        values = np.zeros(spec.shape, dtype=complex)
        for _ in range(int(rng.integers(1, 4))):
            width = rng.uniform(0.06, 0.12) * L
            centre = rng.uniform(-0.15, 0.15, size=3) * L
            amplitude = rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
            r2 = (x - centre[0]) ** 2 + (y - centre[1]) ** 2 + (z - centre[2]) ** 2
            values += amplitude * np.exp(-r2 / (2.0 * width * width))
        mass = float(np.sum(np.abs(values) ** 2) * spec.cell_volume)
        target = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        if mass == 0.0 or boundary_shell_fraction(values, spec) > SHELL_LIMIT:
            continue
        states.append(Field(spec, values * np.sqrt(target / mass)))
    return states
