"""Experiment definitions behind the ``nsp`` subcommands.

Each experiment has a ``prepare`` step that turns raw configuration entries
into validated inputs (so nothing runs on a bad config) and a ``run`` step
that returns an :class:`ExperimentResult` with its checks and tables.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import algebra_checks as alg
from ..doping import GaussianProfile, RadialProfile, ZeroProfile, ball_geometry, gaussian_sign_roots
from ..errors import ConfigError
from ..fibering import Fiber, decomposition_terms, project_to_manifold, remainder_by_definition, remainder_direct, scan_fiber
from ..functionals import analyse, assemble, modulus_gradient_gap, pivot_combination
from ..grid import Field, RadialGrid
from ..solvers.action import gaussian_init, solve_action_gss
from ..solvers.energy import solve_energy_gss
from ..solvers.radial import solve_radial_global
from ..solvers.rayleigh import first_box_eigenvalue, quadratic_form_infimum, square_well_ground_energy
from ..solvers.reference import (estimate_mu_star, gaussian_state, gaussian_trial_minimum,
                                 roundtrip_energy_action, roundtrip_threshold, threshold_box)
from .config import (RawConfig, RunConfig, charge_exponent_from, grid_from, params_from, profile_from,
                     solver_from)
from .corpus import random_corpus
from .report import ExperimentResult, at_most, holds

log = logging.getLogger(__name__)

IDENTITY_TOL = 1e-12
DECOMPOSITION_TOL = 1e-10
DEFECT_TOL = 1e-3


@dataclass(frozen=True)
class Experiment:
    name: str
    prepare: Callable[[RawConfig, int | None], RunConfig]
    run: Callable[[RunConfig], ExperimentResult]
    summary: str


def _history_table(history) -> tuple[list[str], list[list]]:
    return ["iteration", "objective", "residual"], [[i, v, r] for i, (v, r) in enumerate(history)]


def _defect_checks(b) -> list:
    return [at_most(f"|{name}| / (A + w B + C)", abs(getattr(b, name)) / b.scale, DEFECT_TOL) for name in "NPJ"]


# solve-action

def _prepare_action(cfg, seed):
    inputs = {"spec": grid_from(cfg), "params": params_from(cfg), "profile": profile_from(cfg),
              "phase": cfg.float("init.phase", 0.0), "width": cfg.float("init.width", None)}
    if inputs["params"].p <= 2 or inputs["params"].p >= 5:
        raise ConfigError("solve-action needs 2 < params.p < 5", cfg.line("params.p"))
    return RunConfig("solve-action", cfg, solver_from(cfg, seed), inputs)


def _run_action(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    init = gaussian_init(x["spec"], x["params"], x["width"])
    if x["phase"]:
        init = Field(init.spec, init.values * np.exp(1j * x["phase"]))
    rep = solve_action_gss(x["params"], x["profile"], init, tol=rc.solver.tol, max_iter=rc.solver.max_iter)
    b = rep.breakdown
    _, scan = project_to_manifold(rep.state, x["params"], x["profile"])
    gap = modulus_gradient_gap(rep.state)[2]
    checks = [at_most("residual", rep.residual_norm, rc.solver.tol),
              *_defect_checks(b),
              holds("fibre has one sign change", scan.sign_changes == 1, scan.sign_changes, 1),
              at_most("modulus gradient gap", gap, 1e-8),
              holds("pivot combination > 0", pivot_combination(b) > 0, pivot_combination(b), "> 0"),
              holds("sigma > 0", b.I > 0, b.I, "> 0")]
    extra = {"iterations": rep.iterations, "notes": rep.notes}
    return ExperimentResult("solve-action", checks, b.to_dict(), extra, {"history": _history_table(rep.history)})


# solve-energy

def _prepare_energy(cfg, seed):
    e, p = charge_exponent_from(cfg)
    mu = cfg.float("energy.mu")
    if not mu > 0:
        raise ConfigError("energy.mu must be positive", cfg.line("energy.mu"))
    if not (2 < p < 7 / 3):
        raise ConfigError("solve-energy needs 2 < params.p < 7/3", cfg.line("params.p"))
    spec = grid_from(cfg) if cfg.has("grid.L") else threshold_box(mu, e, p, cfg.int("grid.n", 64))
    inputs = {"mu": mu, "e": e, "p": p, "profile": profile_from(cfg), "spec": spec}
    return RunConfig("solve-energy", cfg, solver_from(cfg, seed, max_iter=3000), inputs)


def _run_energy(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    a, _ = gaussian_trial_minimum(x["mu"], x["e"], x["p"])
    init = gaussian_state(x["spec"], x["mu"], a)
    rep = solve_energy_gss(x["mu"], x["e"], x["p"], x["profile"], init, tol=rc.solver.tol,
                           max_iter=rc.solver.max_iter)
    s = analyse(rep.state, x["p"], x["profile"])
    checks = [at_most("residual", rep.residual_norm, rc.solver.tol),
              at_most("|B - mu| / mu", abs(s.B - x["mu"]) / x["mu"], 1e-10),
              holds("multiplier > 0", rep.omega_mu > 0, rep.omega_mu, "> 0")]
    extra = {"c_mu": rep.c_mu, "omega_mu": rep.omega_mu, "half_width": x["spec"].half_width, "notes": rep.notes}
    bd = rep.breakdown.to_dict() if rep.breakdown is not None else None
    return ExperimentResult("solve-energy", checks, bd, extra, {"history": _history_table(rep.history)})


# fiber

def _prepare_fiber(cfg, seed):
    inputs = {"spec": grid_from(cfg), "params": params_from(cfg), "profile": profile_from(cfg),
              "range": (cfg.float("fiber.lambda_min", 1 / 16), cfg.float("fiber.lambda_max", 16.0)),
              "points": cfg.int("fiber.points", 257), "state": cfg.text("fiber.state", "gaussian")}
    lo, hi = inputs["range"]
    if not 0 < lo < hi:
        raise ConfigError("need 0 < fiber.lambda_min < fiber.lambda_max", cfg.line("fiber.lambda_min"))
    if inputs["state"] not in ("gaussian", "corpus"):
        raise ConfigError("fiber.state must be gaussian or corpus", cfg.line("fiber.state"))
    if inputs["points"] < 3:
        raise ConfigError("fiber.points must be at least 3", cfg.line("fiber.points"))
    return RunConfig("fiber", cfg, solver_from(cfg, seed), inputs)


def _run_fiber(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    if x["state"] == "gaussian":
        u = gaussian_init(x["spec"], x["params"])
    else:
        u = random_corpus(rc.solver.seed, 1, x["spec"])[0]
    fiber = Fiber(analyse(u, x["params"].p, x["profile"]), x["params"])
    scan = scan_fiber(fiber, x["range"], x["points"])
    gaps = []
    for lam in (0.5, 1.0, 2.0):
        h = 1e-4 * lam
        slope = (fiber(lam + h)[0] - fiber(lam - h)[0]) / (2 * h)
        J = fiber(lam)[1]
        gaps.append(abs(lam * slope - J) / max(1.0, fiber.terms(lam)["scale"]))
    checks = [holds("J changes sign", scan.sign_changes >= 1, scan.sign_changes, ">= 1"),
              at_most("lam f'(lam) vs J(u_lam)", max(gaps), 1e-6)]
    extra = {"critical_points": scan.critical_points, "lambda_u": scan.lambda_u, "unique_max": scan.unique_max}
    rows = [[l, f, J] for l, f, J in scan.rows()]
    return ExperimentResult("fiber", checks, fiber.breakdown.to_dict(), extra, {"fiber": (["lambda", "f", "J"], rows)})


# verify-identities

def _prepare_identities(cfg, seed):
    inputs = {"spec": grid_from(cfg), "params": params_from(cfg), "profile": profile_from(cfg),
              "count": cfg.int("corpus.count", 10), "lambdas": cfg.floats("identities.lambdas", (0.25, 0.5, 2.0, 4.0))}
    if inputs["count"] < 1:
        raise ConfigError("corpus.count must be at least 1", cfg.line("corpus.count"))
    if any(l <= 0 for l in inputs["lambdas"]):
        raise ConfigError("identities.lambdas must be positive", cfg.line("identities.lambdas"))
    return RunConfig("verify-identities", cfg, solver_from(cfg, seed), inputs)


def identity_defects(b) -> dict[str, float]:
    """Relative defects of the linear identities between derived functionals."""
    scale = max(1.0, b.scale)
    return {"J = 2N - P": abs(b.J - (2 * b.N - b.P)) / scale,
            "K = I - J/3": abs(b.K - (b.I - b.J / 3)) / scale,
            "I = E + w B / 2": abs(b.I - (b.E_energy + b.omega * b.B / 2)) / scale}


def _run_identities(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    params, profile = x["params"], x["profile"]
    corpus = random_corpus(rc.solver.seed, x["count"], x["spec"])
    worst = {"decomposition": 0.0, "remainder": 0.0, "J = 2N - P": 0.0, "K = I - J/3": 0.0, "I = E + w B / 2": 0.0}
    rows = []
    smooth = isinstance(profile, RadialProfile) and not isinstance(profile, ZeroProfile)
    for index, u in enumerate(corpus):
        fiber = Fiber(analyse(u, params.p, profile), params)
        for name, value in identity_defects(fiber.breakdown).items():
            worst[name] = max(worst[name], value)
        for lam in x["lambdas"]:
            t = decomposition_terms(fiber, lam)
            rel = t["residual"] / t["max_term"]
            worst["decomposition"] = max(worst["decomposition"], rel)
            gap = 0.0
            if smooth:
                r_def, r_dir = remainder_by_definition(fiber, lam), remainder_direct(fiber, lam)
                gap = abs(r_def - r_dir) / max(abs(r_def), abs(r_dir), 1e-300)
                worst["remainder"] = max(worst["remainder"], gap)
            rows.append([index, lam, t["lhs"], t["rhs"], rel, gap])
    checks = [at_most("decomposition residual / max term", worst["decomposition"], DECOMPOSITION_TOL)]
    if smooth:
        checks.append(at_most("remainder: definition vs pointwise", worst["remainder"], DECOMPOSITION_TOL))
    checks += [at_most(name, worst[name], IDENTITY_TOL) for name in ("J = 2N - P", "K = I - J/3", "I = E + w B / 2")]
    if isinstance(profile, GaussianProfile):
        checks += sign_analysis_checks(profile)
    table = {"identities": (["state", "lambda", "lhs", "rhs", "relative_residual", "remainder_gap"], rows)}
    return ExperimentResult("verify-identities", checks, None, {"states": len(corpus)}, table)


def sign_analysis_checks(profile: GaussianProfile, tol: float = 1e-6) -> list:
    """Sign-change locations of the two density combinations in ``t = alpha |x|^2``."""
    expected = ((7 - math.sqrt(33)) / 4, (7 + math.sqrt(33)) / 4)
    found = gaussian_sign_roots(profile, "pohozaev")
    dil = gaussian_sign_roots(profile, "dilation")
    checks = [holds("2rho + 3x.grad rho + x.D2rho x/2 has two sign changes", len(found) == 2, len(found), 2)]
    if len(found) == 2:
        checks += [at_most(f"root {i + 1} vs (7 {'-+'[i]} sqrt 33)/4", abs(f - z), tol)
                   for i, (f, z) in enumerate(zip(found, expected))]
    checks.append(holds("rho + x.grad rho has one sign change", len(dil) == 1, len(dil), 1))
    if len(dil) == 1:
        checks.append(at_most("rho + x.grad rho root vs 1/2", abs(dil[0] - 0.5), tol))
    return checks


# detcheck

def _prepare_detcheck(cfg, seed):
    inputs = {"draws": cfg.int("detcheck.draws", 1000), "synthetic": cfg.int("detcheck.synthetic", 200)}
    if inputs["draws"] < 1 or inputs["synthetic"] < 1:
        raise ConfigError("detcheck.draws and detcheck.synthetic must be at least 1", cfg.line("detcheck.draws"))
    return RunConfig("detcheck", cfg, solver_from(cfg, seed), inputs)


def algebra_summary(draws: int, synthetic: int, seed: int) -> dict[str, float | bool]:
    """Worst gaps of the determinant, the linear round trip and the closed forms."""
    gaps = alg.random_det_draws(draws, seed)
    rng = np.random.default_rng(seed + 1)
    round_trip = d_gap = c_gap = 0.0
    for _ in range(synthetic):
        p, w, e = rng.uniform(2.05, 4.95), rng.uniform(0.1, 10), rng.uniform(0.1, 10)
        round_trip = max(round_trip, alg.round_trip_gap(alg.stationarity_matrix(p, w, e), rng.uniform(-5, 5, size=4)))
        sol = alg.solve_from_sources(alg.stationarity_matrix(p, w, e), alg.stationarity_rhs_map(), rng.uniform(-5, 5, size=4), p, e)
        d_gap, c_gap = max(d_gap, sol.D_gap), max(c_gap, sol.C_gap)
    base = alg.round_trip_gap(alg.lambda_matrix(3.0, 1.0, 1.0, 1.0).entries, (1.0, 2.0, 3.0, 4.0))
    sing = alg.detect_singularities(3.0, 1.0, 1.0, (0.0, 1.0 / 3.0, 0.5))
    pivot = alg.pivot_coefficients(3.0, 1.0, 1.0)
    pivot_gap = float(np.max(np.abs(pivot - np.array([3.0, 16 / 3, -7 / 3, -1 / 3]))))
    return {"det": float(np.max(gaps)), "round_trip": max(round_trip, base), "D": d_gap, "C": c_gap,
            "mu0": sing[0.0][0], "mu13": sing[1 / 3][0], "mu05": not sing[0.5][0], "pivot": pivot_gap}


def _run_detcheck(rc: RunConfig) -> ExperimentResult:
    s = algebra_summary(rc.inputs["draws"], rc.inputs["synthetic"], rc.solver.seed)
    checks = [at_most("det closed form vs numeric (relative)", s["det"], IDENTITY_TOL),
              at_most("linear solve round trip", s["round_trip"], IDENTITY_TOL),
              at_most("closed-form D vs solve", s["D"], IDENTITY_TOL),
              at_most("closed-form C vs solve", s["C"], IDENTITY_TOL),
              holds("singular at mu = 0", s["mu0"]),
              holds("singular at mu = 1/3", s["mu13"]),
              holds("regular at mu = 1/2", s["mu05"]),
              at_most("reduced row vs (3, 16/3, -7/3, -1/3)", s["pivot"], IDENTITY_TOL)]
    return ExperimentResult("detcheck", checks, None, {"draws": rc.inputs["draws"]})


# geometry

def _prepare_geometry(cfg, seed):
    radii = cfg.floats("geometry.R", (0.5, 1.0, 2.0))
    if not radii or any(r <= 0 for r in radii):
        raise ConfigError("geometry.R must list positive radii", cfg.line("geometry.R"))
    return RunConfig("geometry", cfg, solver_from(cfg, seed), {"radii": radii})


def _run_geometry(rc: RunConfig) -> ExperimentResult:
    geoms = [ball_geometry(R) for R in rc.inputs["radii"]]
    ratios = [g.D_Omega / g.volume ** (5 / 6) for g in geoms]
    checks = [at_most("kappa1 vs 3/R", max(abs(g.kappa1 - 3 / g.R) * g.R / 3 for g in geoms), 1e-15),
              at_most("kappa2 vs 1", max(abs(g.kappa2 - 1) for g in geoms), 1e-15),
              at_most("D / |Omega|^(5/6) spread", (max(ratios) - min(ratios)) / max(ratios), 1e-12)]
    rows = [[g.R, g.volume, g.surface, g.L, g.kappa1, g.kappa2, g.H_norm, g.D_Omega] for g in geoms]
    header = ["R", "volume", "surface", "L", "kappa1", "kappa2", "H_norm", "D_Omega"]
    extra = {"balls": [dict(zip(header, row)) for row in rows]}
    return ExperimentResult("geometry", checks, None, extra, {"geometry": (header, rows)})


# mu-star

def _prepare_mu_star(cfg, seed):
    e, p = charge_exponent_from(cfg)
    if not (2 < p < 7 / 3) or not e > 0:
        raise ConfigError("mu-star needs 2 < params.p < 7/3 and params.e > 0", cfg.line("params.p"))
    tol = cfg.float("mu_star.tol", 1e-3)
    if not tol > 0:
        raise ConfigError("mu_star.tol must be positive", cfg.line("mu_star.tol"))
    inputs = {"e": e, "p": p, "tol": tol, "probes": cfg.int("mu_star.probes", 5)}
    return RunConfig("mu-star", cfg, solver_from(cfg, seed), inputs)


def _run_mu_star(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    est = estimate_mu_star(x["e"], x["p"], x["tol"], x["probes"])
    trial = est.trial_threshold
    again = estimate_mu_star(x["e"], x["p"], x["tol"], x["probes"], bracket=(0.3 * trial, 1.1 * trial))
    lo, hi = est.bracket
    checks = [at_most("bracket width / mu*", (hi - lo) / hi, x["tol"]),
              holds("probe energies non-increasing", est.monotone),
              at_most("second bracket agreement / mu*", abs(again.mu_star - est.mu_star) / est.mu_star, 2 * x["tol"]),
              holds("mu* below the Gaussian trial threshold", est.mu_star <= trial, est.mu_star, trial)]
    extra = {"mu_star": est.mu_star, "bracket": est.bracket, "trial_threshold": trial,
             "roundtrip_threshold": roundtrip_threshold(est.mu_star, x["p"])}
    return ExperimentResult("mu-star", checks, None, extra,
                            {"probes": (["mu", "min_energy_zero"], [list(pv) for pv in est.probes])})


# roundtrip

def _prepare_roundtrip(cfg, seed):
    e, p = charge_exponent_from(cfg)
    if not (2 < p < 7 / 3) or not e > 0:
        raise ConfigError("roundtrip needs 2 < params.p < 7/3 and params.e > 0", cfg.line("params.p"))
    inputs = {"e": e, "p": p, "profile": profile_from(cfg), "n": cfg.int("grid.n", 64),
              "mu": cfg.float("roundtrip.mu", None), "factor": cfg.float("roundtrip.factor", 1.05),
              "mu_star": cfg.float("roundtrip.mu_star", None), "mu_star_tol": cfg.float("mu_star.tol", 1e-3)}
    if inputs["factor"] < 1:
        raise ConfigError("roundtrip.factor must be at least 1", cfg.line("roundtrip.factor"))
    return RunConfig("roundtrip", cfg, solver_from(cfg, seed, max_iter=3000), inputs)


def _run_roundtrip(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    mu_star = x["mu_star"] if x["mu_star"] is not None else estimate_mu_star(x["e"], x["p"], x["mu_star_tol"]).mu_star
    threshold = roundtrip_threshold(mu_star, x["p"])
    mu = x["mu"] if x["mu"] is not None else x["factor"] * threshold
    start = time.monotonic()
    rep = roundtrip_energy_action(mu, x["e"], x["p"], x["profile"], tol=rc.solver.tol, n=x["n"])
    elapsed = time.monotonic() - start
    sigma_u = abs(rep.action_report.sigma)
    checks = [holds("mu above the roundtrip threshold", mu >= threshold, mu, threshold),
              at_most("|B(w) - mu| / mu", rep.relative_mass_gap, 1e-4),
              at_most("|E(w) - E(u)| / |E(u)|", rep.relative_energy_gap, 1e-4),
              at_most("|I(w) - I(u)| / |I(u)|", rep.action_gap / sigma_u, 1e-4),
              at_most("energy solve residual", rep.energy_report.residual_norm, rc.solver.tol),
              at_most("action solve residual", rep.action_report.residual_norm, rc.solver.tol)]
    extra = {"mu": mu, "mu_star": mu_star, "threshold": threshold, "omega_mu": rep.energy_report.omega_mu,
             "c_mu": rep.energy_report.c_mu, "seconds": elapsed}
    tables = {"energy_history": _history_table(rep.energy_report.history),
              "action_history": _history_table(rep.action_report.history)}
    return ExperimentResult("roundtrip", checks, rep.action_report.breakdown.to_dict(), extra, tables)


# radial

def _prepare_radial(cfg, seed):
    params = params_from(cfg)
    if not (1 < params.p < 2):
        raise ConfigError("radial needs 1 < params.p < 2", cfg.line("params.p"))
    profile = profile_from(cfg)
    if not isinstance(profile, RadialProfile):
        raise ConfigError("radial needs a radial profile (zero, gaussian or rational)", cfg.line("profile.kind"))
    inputs = {"params": params, "profile": profile,
              "grid": RadialGrid(cfg.int("radial.intervals", 1600), cfg.float("radial.r_max", 40.0)),
              "lift": grid_from(cfg) if cfg.has("grid.n") else None}
    return RunConfig("radial", cfg, solver_from(cfg, seed, max_iter=20000), inputs)


def _run_radial(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    tol = min(rc.solver.tol, 1e-9)
    rep = solve_radial_global(x["params"], x["profile"], tol=tol, grid=x["grid"], max_iter=rc.solver.max_iter)
    checks = [at_most("residual", rep.residual_norm, tol),
              holds("I(u0) < 0", rep.sigma < 0, rep.sigma, "< 0"),
              holds("minimal over sampled dilations and amplitudes", rep.extras["family"]["minimal"])]
    extra = {"sigma": rep.sigma, "notes": rep.notes}
    bd = None
    if x["lift"] is not None:
        lifted = rep.state.lift(x["lift"])
        b = assemble(analyse(lifted, x["params"].p, x["profile"]), x["params"])
        checks.append(at_most("3D lift vs radial I (relative)", abs(b.I - rep.sigma) / abs(rep.sigma), 1e-3))
        bd = b.to_dict()
    d = rep.extras["radial_data"]
    rows = [[r, u] for r, u in zip(d.grid.r, d.u)]
    return ExperimentResult("radial", checks, bd, extra,
                            {"history": _history_table(rep.history), "profile": (["r", "u"], rows)})


# rayleigh

def _prepare_rayleigh(cfg, seed):
    kind = cfg.text("rayleigh.potential")
    inputs = {"spec": grid_from(cfg), "kind": kind, "boundary": cfg.text("rayleigh.boundary", "dirichlet")}
    if kind == "well":
        inputs["depth"], inputs["radius"] = cfg.float("well.depth"), cfg.float("well.radius")
        if not (inputs["depth"] > 0 and inputs["radius"] > 0):
            raise ConfigError("well.depth and well.radius must be positive", cfg.line("well.depth"))
    elif kind == "doping":
        inputs["e"], inputs["profile"] = cfg.float("params.e"), profile_from(cfg)
        if not isinstance(inputs["profile"], RadialProfile):
            raise ConfigError("doping potential needs a radial profile", cfg.line("profile.kind"))
    elif kind != "zero":
        raise ConfigError("rayleigh.potential must be zero, well or doping", cfg.line("rayleigh.potential"))
    if inputs["boundary"] not in ("dirichlet", "periodic"):
        raise ConfigError("rayleigh.boundary must be dirichlet or periodic", cfg.line("rayleigh.boundary"))
    return RunConfig("rayleigh", cfg, solver_from(cfg, seed, max_iter=2000), inputs)


def rayleigh_potential(x: dict) -> Field:
    spec = x["spec"]
    if x["kind"] == "zero":
        return Field.zeros(spec)
    if x["kind"] == "well":
        return Field(spec, -x["depth"] * (spec.radius < x["radius"]))
    return Field(spec, -2 * x["e"] ** 2 * x["profile"].coulomb(spec.radius))


def _run_rayleigh(rc: RunConfig) -> ExperimentResult:
    x = rc.inputs
    tol = min(rc.solver.tol, 1e-8)
    res = quadratic_form_infimum(rayleigh_potential(x), tol=tol, max_iter=rc.solver.max_iter,
                                 seed=rc.solver.seed, boundary=x["boundary"])
    extra = {"value": res.value, "iterations": res.iterations}
    checks = [at_most("residual", res.residual_norm, tol)]
    if x["kind"] == "zero":
        top = first_box_eigenvalue(x["spec"], x["boundary"])
        checks += [holds("value >= 0", res.value >= -1e-12, res.value, ">= 0"),
                   holds("value <= first box eigenvalue", res.value <= top * (1 + 1e-9), res.value, top)]
    elif x["kind"] == "well":
        shooting = square_well_ground_energy(x["depth"], x["radius"])
        extra["shooting"] = shooting
        checks.append(holds("value < 0", res.value < 0, res.value, "< 0"))
    else:
        checks.append(holds("value >= -1e-6", res.value >= -1e-6, res.value, ">= -1e-6"))
    rows = [[i, q] for i, q in enumerate(res.history)]
    return ExperimentResult("rayleigh", checks, None, extra, {"history": (["iteration", "quotient"], rows)})


EXPERIMENTS: dict[str, Experiment] = {e.name: e for e in [
    Experiment("solve-action", _prepare_action, _run_action, "action ground state at fixed frequency"),
    Experiment("solve-energy", _prepare_energy, _run_energy, "energy ground state at fixed mass"),
    Experiment("fiber", _prepare_fiber, _run_fiber, "fibering scan of one state (CSV lambda,f,J)"),
    Experiment("verify-identities", _prepare_identities, _run_identities, "exact identities over a random corpus"),
    Experiment("detcheck", _prepare_detcheck, _run_detcheck, "determinant and linear-system checks"),
    Experiment("geometry", _prepare_geometry, _run_geometry, "ball geometry constants"),
    Experiment("mu-star", _prepare_mu_star, _run_mu_star, "undoped mass threshold by bisection"),
    Experiment("roundtrip", _prepare_roundtrip, _run_roundtrip, "energy and action ground states compared"),
    Experiment("radial", _prepare_radial, _run_radial, "radial global minimiser for 1 < p < 2"),
    Experiment("rayleigh", _prepare_rayleigh, _run_rayleigh, "lowest Rayleigh quotient of -Lap + V"),
]}
