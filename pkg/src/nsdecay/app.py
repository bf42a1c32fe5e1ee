"""Top-level orchestration for nsdecay."""

from __future__ import annotations

import asyncio
import sys
from typing import NoReturn

from nsdecay.commands import run_experiment_cli, run_sweep_cli
from nsdecay.common import configure_logging, load_dotenv_if_available
from nsdecay.parser import create_parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    load_dotenv_if_available()

    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if args.command is None:
        parser.print_help()
        return 1

    if args.command == "sweep":
        return asyncio.run(run_sweep_cli(args))

    if args.command in {"constant", "heat-oracle", "simulate", "verify-chain"}:
        return run_experiment_cli(args)

    parser.print_help()
    return 1


def cli_main() -> NoReturn:
    """CLI entry point that exits with the appropriate code."""
    try:
        exit_code = main()
        sys.exit(exit_code)
    except KeyboardInterrupt:
        print()
        sys.exit(130)
    except Exception as exc:
        print(f"Error: {exc}", file=sys.stderr)
        sys.exit(1)
