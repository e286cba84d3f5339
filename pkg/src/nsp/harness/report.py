"""JSON reports and CSV tables written by the command-line driver."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__


@dataclass(frozen=True)
class Check:
    name: str
    value: float | bool
    tolerance: float | str | None
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _plain(self.value), "tolerance": _plain(self.tolerance),
                "pass": bool(self.passed)}


def at_most(name: str, value: float, tolerance: float) -> Check:
    """``value <= tolerance``; NaN fails."""
    return Check(name, float(value), tolerance, bool(value <= tolerance))


def holds(name: str, condition: bool, value=None, tolerance=None) -> Check:
    return Check(name, condition if value is None else value, tolerance, bool(condition))


@dataclass
class ExperimentResult:
    experiment: str
    checks: list[Check] = field(default_factory=list)
    breakdown: dict | None = None
    extra: dict = field(default_factory=dict)
    tables: dict[str, tuple[list[str], list[list]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self, config_echo: dict, seed: int) -> dict:
        out = {"experiment": self.experiment, "config_echo": config_echo, "seed": seed,
               "version": __version__, "checks": [c.to_dict() for c in self.checks]}
        if self.breakdown is not None:
            out["breakdown"] = {k: _plain(v) for k, v in self.breakdown.items()}
        if self.extra:
            out["extra"] = _plain(self.extra)
        return out


def _plain(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, (np.complexfloating, complex)):
        return [float(value.real), float(value.imag)]
    return value


def write_outputs(result: ExperimentResult, out_dir: str | Path, config_echo: dict, seed: int) -> Path:
    """Write ``report.json`` and one CSV per table; returns the report path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = out / "report.json"
    report.write_text(json.dumps(result.to_dict(config_echo, seed), indent=2) + "\n")
    for name, (header, rows) in result.tables.items():
        with open(out / f"{name}.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows([[_plain(v) for v in row] for row in rows])
    return report


def format_table(result: ExperimentResult) -> str:
    """One ``PASS``/``FAIL`` line per check."""
    lines = []
    for c in result.checks:
        tol = "" if c.tolerance is None else f" (tolerance {c.tolerance})"
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {_plain(c.value)}{tol}")
    return "\n".join(lines)
