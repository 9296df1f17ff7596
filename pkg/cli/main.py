from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from cli.commands import CommandResult, execute
from cli.config import SUBCOMMANDS, load_run_config
from schemas.errors import ConvergenceError, DomainError, ValidationError

logger = logging.getLogger("spiketest")

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COMPUTE = 2
EXIT_ORACLE = 3

HELP = {
    "calibrate": "Centering and scaling constants of U, W, V, R under H0 and a spiked H1",
    "test": "Decide all four tests on a data matrix",
    "simulate": "Monte Carlo size/power study over population models and entry laws",
    "power": "Predicted power curves and the kappa comparison over a spike grid",
    "oracle-check": "Closed forms against independent numerical quadrature",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spiketest", description="Linear spectral statistic tests for spiked covariance")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name, help=HELP[name])
        cmd.add_argument("--config", required=True, help="JSON run configuration")
        cmd.add_argument("--out", default=None, help="Output directory (default runs/<subcommand>_<run id>)")
        cmd.add_argument("--seed", type=int, default=None, help="Override the config seed")
        cmd.add_argument("--threads", type=int, default=None, help="Worker threads; never changes results")
        cmd.add_argument("--verbose", action="store_true", help="INFO logging on stderr")
        cmd.add_argument("--debug", action="store_true", help="DEBUG logging on stderr")
    return parser


def configure_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def run(argv: list[str] | None = None) -> tuple[int, CommandResult | None]:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.debug)
    try:
        cfg = load_run_config(args.config, args.subcommand, {"seed": args.seed, "threads": args.threads, "out": args.out})
        result = execute(cfg)
    except (ValidationError, DomainError) as exc:
        kind = "validation" if isinstance(exc, ValidationError) else "domain"
        print(f"{kind} error: {exc}", file=sys.stderr)
        return EXIT_INVALID, None
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.debug("computation failed", exc_info=True)
        print(f"computational error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE, None

    print(json.dumps({"out_dir": str(result.out_dir), "exit_code": result.exit_code, "diagnostics": result.diagnostics}, indent=2))
    return result.exit_code, result


def main(argv: list[str] | None = None) -> None:
    code, _ = run(argv)
    raise SystemExit(code)


if __name__ == "__main__":
    main()
