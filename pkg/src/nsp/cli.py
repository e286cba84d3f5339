"""``nsp <subcommand> --config <path> --out <dir> [--seed N]``.

Exit status: 0 when every check passes, 1 on a failed check or a solver
error, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, NspError
from .harness.config import load_config
from .harness.experiments import EXPERIMENTS
from .harness.report import ExperimentResult, format_table, holds, write_outputs

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("nsp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsp", description="Doped Schroedinger-Poisson numerics.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="subcommand")
    for name, exp in EXPERIMENTS.items():
        p = sub.add_parser(name, help=exp.summary)
        p.add_argument("--config", required=True, help="key-value run configuration")
        p.add_argument("--out", required=True, help="output directory for report.json and CSV tables")
        p.add_argument("--seed", type=int, default=None, help="overrides solver.seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    exp = EXPERIMENTS[args.experiment]
    try:
        raw = load_config(args.config)
        declared = raw.text("experiment", args.experiment)
        if declared != args.experiment:
            raise ConfigError(f"config is for experiment '{declared}', not '{args.experiment}'", raw.line("experiment"))
        rc = exp.prepare(raw, args.seed)
    except ConfigError as exc:
        print(f"nsp: config error in {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    log.info("running %s with seed %d", exp.name, rc.solver.seed)
    try:
        result = exp.run(rc)
    except NspError as exc:
        log.error("%s failed: %s", exp.name, exc)
        result = ExperimentResult(exp.name, [holds(f"solver: {type(exc).__name__}", False, str(exc))])
    path = write_outputs(result, args.out, raw.echo(), rc.solver.seed)
    print(format_table(result))
    print(f"report: {path}")
    return EXIT_PASS if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
