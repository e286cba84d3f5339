"""Flat key-value run configuration with dotted section keys.

Grammar, one entry per line::

    line    := blank | comment | entry
    comment := '#' anything
    entry   := key '=' value [comment]
    key     := name ('.' name)*        name := [A-Za-z_][A-Za-z0-9_-]*
    value   := any text up to an unquoted '#', stripped

Lists are comma-separated; ball unions are ``;``-separated groups of
``cx cy cz R alpha``.  Keys may appear once.  Every lookup error names the
key and, when it came from the file, its line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..doping import Ball, BallUnion, GaussianProfile, InverseRationalProfile, ZeroProfile
from ..errors import ConfigError, NspError
from ..functionals import PhysParams
from ..grid import GridSpec

KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*(\.[A-Za-z_][A-Za-z0-9_-]*)*$")
_MISSING = object()


@dataclass
class RawConfig:
    """Parsed entries ``key -> (text, line)`` plus the source for echoing."""

    entries: dict[str, tuple[str, int | None]]
    source: str = "<memory>"

    def has(self, key: str) -> bool:
        return key in self.entries

    def text(self, key: str, default=_MISSING) -> str:
        if key not in self.entries:
            if default is _MISSING:
                raise ConfigError(f"missing required key '{key}'")
            return default
        return self.entries[key][0]

    def line(self, key: str) -> int | None:
        return self.entries.get(key, ("", None))[1]

    def _convert(self, key: str, default, convert, kind: str):
        if key not in self.entries:
            if default is _MISSING:
                raise ConfigError(f"missing required key '{key}'")
            return default
        text, line = self.entries[key]
        try:
            return convert(text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key '{key}': expected {kind}, got {text!r}", line) from exc

    def float(self, key: str, default=_MISSING) -> float:
        return self._convert(key, default, float, "a number")

    def int(self, key: str, default=_MISSING) -> int:
        return self._convert(key, default, _strict_int, "an integer")

    def floats(self, key: str, default=_MISSING) -> tuple[float, ...]:
        return self._convert(key, default, lambda t: tuple(float(v) for v in t.split(",") if v.strip()),
                             "a comma-separated list of numbers")

    def echo(self) -> dict[str, str]:
        return {k: v for k, (v, _) in sorted(self.entries.items())}


def _strict_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


def parse_config_text(text: str, source: str = "<memory>") -> RawConfig:
    entries: dict[str, tuple[str, int | None]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not KEY.match(key):
            raise ConfigError(f"invalid key {key!r}", number)
        if not value:
            raise ConfigError(f"key '{key}' has no value", number)
        if key in entries:
            raise ConfigError(f"duplicate key '{key}' (first set on line {entries[key][1]})", number)
        entries[key] = (value, number)
    return RawConfig(entries, source)


def load_config(path: str | Path) -> RawConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text, str(path))


def _wrap(cfg: RawConfig, key: str, build):
    """Run a constructor and report domain errors against ``key``'s line."""
    try:
        return build()
    except ConfigError:
        raise
    except NspError as exc:
        raise ConfigError(f"{key}: {exc}", cfg.line(key)) from exc


def grid_from(cfg: RawConfig) -> GridSpec:
    n, L = cfg.int("grid.n"), cfg.float("grid.L")
    return _wrap(cfg, "grid.n", lambda: GridSpec(n, L))


def params_from(cfg: RawConfig) -> PhysParams:
    omega, e, p = cfg.float("params.omega"), cfg.float("params.e"), cfg.float("params.p")
    return _wrap(cfg, "params.omega", lambda: PhysParams(omega, e, p))


def charge_exponent_from(cfg: RawConfig) -> tuple[float, float]:
    """``(e, p)`` for experiments without a frequency."""
    return cfg.float("params.e"), cfg.float("params.p")


def profile_from(cfg: RawConfig):
    kind = cfg.text("profile.kind")
    if kind == "zero":
        return ZeroProfile()
    if kind == "gaussian":
        eps, alpha = cfg.float("profile.eps"), cfg.float("profile.alpha")
        return _wrap(cfg, "profile.kind", lambda: GaussianProfile(eps, alpha))
    if kind == "rational":
        eps, alpha, power = cfg.float("profile.eps"), cfg.float("profile.alpha"), cfg.float("profile.power")
        return _wrap(cfg, "profile.kind", lambda: InverseRationalProfile(eps, alpha, power))
    if kind == "balls":
        return _wrap(cfg, "profile.balls", lambda: BallUnion(tuple(_parse_balls(cfg))))
    raise ConfigError(f"profile.kind must be zero, gaussian, rational or balls, got {kind!r}", cfg.line("profile.kind"))


def _parse_balls(cfg: RawConfig) -> list[Ball]:
    text = cfg.text("profile.balls")
    balls = []
    for group in filter(None, (g.strip() for g in text.split(";"))):
        parts = group.replace(",", " ").split()
        if len(parts) != 5:
            raise ConfigError(f"profile.balls: each ball needs 'cx cy cz R alpha', got {group!r}",
                              cfg.line("profile.balls"))
        try:
            cx, cy, cz, R, alpha = (float(v) for v in parts)
        except ValueError as exc:
            raise ConfigError(f"profile.balls: non-numeric entry in {group!r}", cfg.line("profile.balls")) from exc
        balls.append(Ball((cx, cy, cz), R, alpha))
    return balls


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6
    max_iter: int = 400
    seed: int = 0


def solver_from(cfg: RawConfig, seed: int | None = None, max_iter: int = 400) -> SolverOptions:
    tol = cfg.float("solver.tol", 1e-6)
    iters = cfg.int("solver.max_iter", max_iter)
    chosen = seed if seed is not None else cfg.int("solver.seed", 0)
    if not tol > 0:
        raise ConfigError("solver.tol must be positive", cfg.line("solver.tol"))
    if iters < 1:
        raise ConfigError("solver.max_iter must be at least 1", cfg.line("solver.max_iter"))
    return SolverOptions(tol, iters, chosen)


@dataclass
class RunConfig:
    """A validated configuration: the experiment name, its built inputs and the raw entries."""

    experiment: str
    raw: RawConfig
    solver: SolverOptions
    inputs: dict = field(default_factory=dict)
