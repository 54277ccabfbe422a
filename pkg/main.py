#!/usr/bin/env python3
"""
splitkit command line

    python main.py run    CONFIG.json [--out DIR] [--seed N] [--quiet] [--log]
    python main.py suite  CONFIG_DIR  [--out DIR] [--seed N] [--quiet] [--log]
    python main.py orders CONFIG.json [--out DIR] [--seed N] [--quiet] [--log]

Exit codes: 0 success, 1 unexpected failure, 2 invalid config,
3 divergence (partial CSV written), 4 solver failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from service.csv_emitter import write_json
from service.experiment_service import EXIT_FAILURE, ExperimentService, exit_code_for
from service.suite_processor import SuiteProcessor
from tools.errors import SplitkitError

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(filename)s:%(lineno)d - %(funcName)s() - %(message)s'

logger = logging.getLogger(__name__)


def configure_logging(quiet: bool, log_dir: Optional[Path] = None) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_dir / "splitkit.log", encoding="utf-8"))
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format=LOG_FORMAT,
                        handlers=handlers, force=True)


def u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None,
                        help="Output directory (run/orders) or output root (suite); default output/")
    common.add_argument("--seed", type=u64, default=None, help="Override the seed of RANDOM initial data")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    common.add_argument("--log", action="store_true", help="Also write splitkit.log next to the artifacts")

    parser = argparse.ArgumentParser(prog="splitkit", description="Decomposition splitting scheme experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("run", parents=[common], help="Run one experiment").add_argument("config", type=Path)
    commands.add_parser("suite", parents=[common], help="Run every *.json in a directory").add_argument(
        "directory", type=Path)
    commands.add_parser("orders", parents=[common], help="Estimate the convergence order").add_argument(
        "config", type=Path)
    return parser


def run_command(args: argparse.Namespace) -> int:
    if args.command == "suite":
        output_root = args.out or Path("output")
        configure_logging(args.quiet, output_root if args.log else None)
        processor = SuiteProcessor(args.directory, output_root, seed_override=args.seed)
        results = processor.run()
        write_json(results, output_root / "suite-summary.json")
        print("\nSUITE SUMMARY:")
        print(f"   Total configs: {results['total_files']}")
        print(f"   Successful: {results['summary']['success']}")
        print(f"   Failed: {results['summary']['failed']}")
        return results["exit_code"]

    service = ExperimentService(args.out or Path("output"), seed_override=args.seed)
    configure_logging(args.quiet, (args.out or Path("output")) if args.log else None)
    result = service.run_path(args.config, args.out, orders_only=args.command == "orders")
    if not result.success:
        for line in result.diagnostics:
            print(line, file=sys.stderr)
        print(f"error: {result.error}", file=sys.stderr)
        return result.exit_code
    for path in (result.csv_path, result.summary_path, result.orders_path):
        if path:
            print(path)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except KeyboardInterrupt:
        logger.info("⚠️  Process interrupted by user")
        return EXIT_FAILURE
    except SplitkitError as e:
        logger.error(f"❌ {e}")
        for line in getattr(e, "diagnostics", []):
            print(line, file=sys.stderr)
        return exit_code_for(e)
    except Exception as e:
        logger.error(f"❌ Fatal error: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
