import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from nsp import cli
from nsp.doping import BallUnion, GaussianProfile, InverseRationalProfile, ZeroProfile
from nsp.errors import ConfigError, InputDomainError
from nsp.grid import GridSpec, boundary_shell_fraction
from nsp.harness.config import grid_from, load_config, params_from, parse_config_text, profile_from, solver_from
from nsp.harness.corpus import SHELL_LIMIT, random_corpus
from nsp.harness.report import ExperimentResult, at_most, format_table, holds, write_outputs

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_parser_reads_entries_comments_and_lists():
    cfg = parse_config_text("# header\n\ngrid.n = 32  # cells\ngrid.L=8\nlist = 1, 2.5,3\n")
    assert cfg.int("grid.n") == 32 and cfg.float("grid.L") == 8.0
    assert cfg.floats("list") == (1.0, 2.5, 3.0)
    assert cfg.line("grid.L") == 4 and cfg.line("absent") is None
    assert cfg.text("absent", "fallback") == "fallback"
    assert cfg.echo() == {"grid.L": "8", "grid.n": "32", "list": "1, 2.5,3"}


@pytest.mark.parametrize("text, line, fragment", [
    ("a = 1\na = 2\n", 2, "duplicate key 'a' (first set on line 1)"),
    ("a = 1\nno equals sign\n", 2, "expected 'key = value'"),
    ("1bad = 3\n", 1, "invalid key"),
    ("a =   # nothing\n", 1, "has no value"),
])
def test_parser_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert info.value.line == line
    assert fragment in str(info.value) and str(info.value).startswith(f"line {line}:")


def test_typed_lookups_report_the_offending_key():
    cfg = parse_config_text("grid.n = 3.5\ngrid.L = soon\n")
    with pytest.raises(ConfigError, match="line 1: key 'grid.n': expected an integer"):
        cfg.int("grid.n")
    with pytest.raises(ConfigError, match="line 2: key 'grid.L': expected a number"):
        cfg.float("grid.L")
    with pytest.raises(ConfigError, match="missing required key 'params.p'"):
        cfg.float("params.p")
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config("/nonexistent/run.cfg")


def test_builders_construct_domain_objects():
    cfg = parse_config_text("grid.n = 16\ngrid.L = 4\nparams.omega = 1\nparams.e = 0.5\nparams.p = 3\n")
    assert grid_from(cfg) == GridSpec(16, 4.0)
    assert params_from(cfg).p == 3.0
    with pytest.raises(ConfigError, match="line 1: grid.n"):
        grid_from(parse_config_text("grid.n = 0\ngrid.L = 4\n"))
    with pytest.raises(ConfigError, match="line 3: params.omega"):
        params_from(parse_config_text("params.p = 7\nparams.e = 0.5\nparams.omega = 1\n"))


@pytest.mark.parametrize("text, kind", [
    ("profile.kind = zero", ZeroProfile),
    ("profile.kind = gaussian\nprofile.eps = 0.1\nprofile.alpha = 2", GaussianProfile),
    ("profile.kind = rational\nprofile.eps = 0.1\nprofile.alpha = 1\nprofile.power = 6", InverseRationalProfile),
    ("profile.kind = balls\nprofile.balls = 0 0 0 1 0.5; 3, 0, 0, 0.5, 0.2", BallUnion),
])
def test_profile_builder(text, kind):
    assert isinstance(profile_from(parse_config_text(text)), kind)


@pytest.mark.parametrize("text, fragment", [
    ("profile.kind = magic", "must be zero, gaussian, rational or balls"),
    ("profile.kind = gaussian\nprofile.eps = -1\nprofile.alpha = 2", "profile.kind"),
    ("profile.kind = balls\nprofile.balls = 0 0 1 0.5", "each ball needs"),
    ("profile.kind = balls\nprofile.balls = 0 0 x 1 0.5", "non-numeric"),
])
def test_profile_builder_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        profile_from(parse_config_text(text))


def test_solver_options():
    opts = solver_from(parse_config_text("solver.tol = 1e-8\nsolver.seed = 4\n"), max_iter=9)
    assert (opts.tol, opts.max_iter, opts.seed) == (1e-8, 9, 4)
    assert solver_from(parse_config_text("solver.seed = 4\n"), seed=11).seed == 11
    with pytest.raises(ConfigError, match="solver.tol must be positive"):
        solver_from(parse_config_text("solver.tol = 0\n"))


def test_corpus_is_deterministic_and_contained():
    spec = GridSpec(32, 8.0)
    first, second = random_corpus(3, 6, spec), random_corpus(3, 6, spec)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(first, second))
    assert not np.array_equal(first[0].values, random_corpus(4, 1, spec)[0].values)
    for state in first:
        assert boundary_shell_fraction(state.values, spec) <= SHELL_LIMIT
        mass = float(np.sum(np.abs(state.values) ** 2) * spec.cell_volume)
        assert 0.05 <= mass <= 50.0
    for bad in (0, 2.5, True):
        with pytest.raises(InputDomainError):
            random_corpus(0, bad, spec)
    with pytest.raises(InputDomainError):
        random_corpus(0, 1, spec, mass_range=(1.0, 1.0))


def test_report_outputs(tmp_path):
    result = ExperimentResult("demo", [at_most("gap", 1e-13, 1e-12), holds("flag", True), at_most("nan", math.nan, 1.0)],
                              {"I": np.float64(1.5)}, {"inf": math.inf, "z": 1 + 2j},
                              {"table": (["k", "v"], [[1, np.float64(0.5)], [2, 0.25]])})
    assert not result.passed
    path = write_outputs(result, tmp_path / "run", {"a": "1"}, 7)
    report = json.loads(path.read_text())
    assert report["seed"] == 7 and report["config_echo"] == {"a": "1"}
    assert [c["pass"] for c in report["checks"]] == [True, True, False]
    assert report["extra"] == {"inf": "inf", "z": [1.0, 2.0]}
    with open(tmp_path / "run" / "table.csv") as handle:
        assert list(csv.reader(handle)) == [["k", "v"], ["1", "0.5"], ["2", "0.25"]]
    assert format_table(result).splitlines()[0] == "PASS  gap: 1e-13 (tolerance 1e-12)"


@pytest.mark.parametrize("name", ["detcheck", "geometry"])
def test_cli_passes_on_the_shipped_configs(name, tmp_path, capsys):
    assert cli.main([name, "--config", str(CONFIGS / f"{name}.cfg"), "--out", str(tmp_path)]) == cli.EXIT_PASS
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["experiment"] == name and all(c["pass"] for c in report["checks"])
    assert "FAIL" not in capsys.readouterr().out


def test_cli_fiber_writes_a_table(tmp_path):
    assert cli.main(["fiber", "--config", str(CONFIGS / "fiber.cfg"), "--out", str(tmp_path)]) == cli.EXIT_PASS
    assert list(tmp_path.glob("*.csv"))


def test_cli_every_subcommand_has_a_config():
    assert sorted(p.stem for p in CONFIGS.glob("*.cfg")) == sorted(cli.EXPERIMENTS)


def test_cli_usage_and_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("experiment = fiber\ngrid.n = 16\ngrid.L = 8\nparams.omega = 1\nparams.e = 0.5\nparams.p = 3\n")
    assert cli.main(["fiber", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_USAGE
    assert "missing required key 'profile.kind'" in capsys.readouterr().err
    assert cli.main(["geometry", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_USAGE
    assert "not 'geometry'" in capsys.readouterr().err
    assert cli.main(["bogus", "--config", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_USAGE
    assert cli.main(["detcheck", "--out", str(tmp_path / "o")]) == cli.EXIT_USAGE
    assert not (tmp_path / "o").exists()


def test_cli_reports_solver_failure_with_exit_one(tmp_path, capsys):
    cfg = tmp_path / "action.cfg"
    cfg.write_text("grid.n = 16\ngrid.L = 8\nparams.omega = 1\nparams.e = 0.5\nparams.p = 3\n"
                   "profile.kind = zero\nsolver.max_iter = 1\n")
    assert cli.main(["solve-action", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_FAIL
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["checks"][0]["name"].startswith("solver:") and not report["checks"][0]["pass"]


def test_corpus_norms_span_a_decade():
    spec = GridSpec(32, 8.0)
    norms = [math.sqrt(float(np.sum(np.abs(u.values) ** 2) * spec.cell_volume)) for u in random_corpus(0, 20, spec)]
    assert max(norms) / min(norms) >= 10.0
