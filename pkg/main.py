#!/usr/bin/env python3

"""
Singlet Stabilization Simulator
Driven-dissipative preparation of a two-transmon singlet: master-equation
dynamics, analytic rates, frequency optimization and parameter sweeps
"""

import argparse
import signal
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from config.manager import COMMANDS, ConfigManager
from experiments.runner import EXIT_CONFIG, print_summary, run
from utils.errors import ConfigError
from utils.logger import get_logger, setup_logging, shutdown_logging
from utils.system import check_system_requirements


def signal_handler(signum, frame):
    """Stop on SIGINT/SIGTERM with file handlers flushed"""
    print("\nInterrupted. Partial results may be incomplete.")
    shutdown_logging()
    sys.exit(130)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Singlet stabilization simulator")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="Command to run (overrides the config file)")
    parser.add_argument("--config", default=None, help="Scenario file (key = value)")
    parser.add_argument("--out", default=None, help="Output directory")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes (default: all cores)")
    parser.add_argument("--svg", action="store_true", default=None, help="Render SVG plots")
    parser.add_argument("--seed", type=int, default=None, help="Random seed for optimizer restarts")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug output on the console")
    return parser


def main(argv=None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)

    # Console-only logging until the output directory is known
    setup_logging(verbose=args.verbose)
    logger = get_logger("main")

    if not check_system_requirements():
        logger.warning("System requirements not met; continuing anyway")

    try:
        config = ConfigManager(args.config).load_config()
        config = config.with_overrides(
            command=args.command,
            output_dir=args.out,
            jobs=args.jobs,
            svg=args.svg,
            seed=args.seed,
        )
    except ConfigError as e:
        logger.error(f"Failed to load configuration: {e}")
        return EXIT_CONFIG

    setup_logging(verbose=args.verbose, log_dir=config.output_dir,
                  structured=config.structured_logs, level=config.log_level)

    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)

    try:
        artifacts = run(config)
        print_summary(artifacts)
        return artifacts.exit_code
    finally:
        shutdown_logging()


if __name__ == "__main__":
    sys.exit(main())
