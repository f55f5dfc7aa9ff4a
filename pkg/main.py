"""Main entry point of the spectrum reservation toolkit.

This module parses the command line, configures logging, loads the
experiment config and dispatches to the sub-command handlers. Tables are
written as CSV to --out or to stdout; logs go to stderr.

Typical usage:
    python main.py reserve-sweep
    python main.py profit-sweep --config experiment.ini --profit network --out profits.csv
    python main.py simulate --seed 7 --trace trace.csv

Exit codes:
    0  success
    2  config validation error (one diagnostic per line on stderr)
    3  solver failure
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from Broker.commands.contracts import cmd_contract_dump
from Broker.commands.fleet import cmd_aggregate
from Broker.commands.reservation import cmd_profit_sweep, cmd_reservation_sweep, cmd_variance_sweep
from Broker.commands.simulation import cmd_simulate
from Broker.config import get_settings, load_experiment_config
from Broker.errors import ConfigValidationError, SolverError
from Broker.services.storage_service import write_table

logger = logging.getLogger(__name__)

CONFIG_HELP = """\
config file (bracketed sections of key = value lines; every key optional):
  [market]      r, s, w, c, u_min
  [xi]          kind (truncated-normal|chi-square|point-mass|empirical-grid),
                mean, variance, dof, scale, lo, hi, csv (x,cdf table)
  [eps]         same keys as [xi]; defaults to chi-square dof 30
  [sweep]       xi_points, w_start, w_stop, w_step, variance_start,
                variance_stop, variance_step, variance_values, grid_size
  [simulation]  periods, accesses, scheme (db-bearing-risk|wsd-bearing-risk),
                policy (fixed-k|menu|centralized|db-sym|db-asym|wsd-opt),
                fixed_k, eps_mode (distribution|random-users), beta, power,
                noise, user_count, workers
  [fleet]       c_ex, xi_mean, xi_variance, eps_dof, max_size,
                mode (mean|sampled|csv), csv (wsd_id,xi table)
  [output]      seed, float_format

Missing keys fall back to the BROKER_* environment settings.
"""

COMMANDS = ("reserve-sweep", "profit-sweep", "contract-dump", "variance-sweep", "aggregate", "simulate")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-command per experiment."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config file")
    common.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    common.add_argument("--seed", type=int, help="override [output] seed")
    common.add_argument("--profit", choices=("db", "wsd", "network"), default="db",
                        help="party whose profit the sweeps report (default: db)")
    common.add_argument("--log-level", choices=("debug", "info", "warning", "error"),
                        help="logging level (default: BROKER_LOG_LEVEL or info)")

    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Spectrum reservation contracts between a geo-location database and white-space devices.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        child = sub.add_parser(name, parents=[common], epilog=CONFIG_HELP,
                               formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "simulate":
            child.add_argument("--trace", type=Path, help="write the per-reservation-period trace CSV here")
    return parser


def _companion(out: Path, label: str) -> Path:
    return out.with_name(f"{out.stem}.{label}{out.suffix or '.csv'}")


def run(args: argparse.Namespace) -> None:
    """Load the config and run one sub-command."""
    config = load_experiment_config(args.config, args.seed)
    fmt = config.output.float_format
    command = args.command

    if command == "reserve-sweep":
        write_table(cmd_reservation_sweep(config), args.out, fmt)
    elif command == "profit-sweep":
        write_table(cmd_profit_sweep(config, args.profit), args.out, fmt)
    elif command == "variance-sweep":
        write_table(cmd_variance_sweep(config, args.profit), args.out, fmt)
    elif command == "contract-dump":
        prefix = args.out.with_suffix("") if args.out else None
        write_table(cmd_contract_dump(config, prefix), args.out, fmt)
    elif command == "aggregate":
        summary, reservations = cmd_aggregate(config)
        write_table(summary, args.out, fmt)
        if args.out:
            write_table(reservations, _companion(args.out, "reservations"), fmt)
    elif command == "simulate":
        report, trace = cmd_simulate(config, trace=args.trace is not None)
        write_table(report, args.out, fmt)
        if trace is not None:
            write_table(trace, args.trace, fmt)


def main(argv: Optional[List[str]] = None) -> int:
    """Command-line entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    settings = get_settings()

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, (args.log_level or settings.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    logger.info(f"{settings.app_name}: {args.command}")

    try:
        run(args)
    except ConfigValidationError as e:
        logger.error(f"Invalid config: {len(e.diagnostics)} problem(s)")
        for diagnostic in e.diagnostics:
            print(diagnostic, file=sys.stderr)
        return 2
    except SolverError as e:
        logger.error(f"Solver failure: {e}")
        return 3
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(str(e), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
