#!/usr/bin/env python3
"""
wtkin - isotropic wave-turbulence kinetics

Runs the reproducible experiments of the kinetics package and writes their
reports.

Usage:
    python wtkin.py evolve --config configs/blowup.conf --out runs/blowup
    python wtkin.py fit-selfsim --trajectory runs/blowup --out runs/fit
    python wtkin.py residual --trajectory runs/blowup --out runs/residual
    python wtkin.py markov-check --out runs/markov
    python wtkin.py nonmarkov-compare --out runs/nonmarkov
    python wtkin.py breakdown --out runs/breakdown
    python wtkin.py wick-check --out runs/wick
    python wtkin.py --help

Exit codes:
    0  success
    1  configuration error, failed assertion or unexpected error
    2  step underflow without blow-up (evolve), or trajectory not in the
       blow-up regime (fit-selfsim, residual)
"""

import sys
import argparse
import logging
from typing import Optional

# Import configuration first to validate environment
from config import ConfigError, RunConfig, config

# Import workflows
from workflows.breakdown import run_breakdown
from workflows.evolve_run import run_evolve
from workflows.markov_check import run_markov_check
from workflows.nonmarkov_compare import run_nonmarkov_compare
from workflows.residual import run_residual
from workflows.selfsim_fit import run_fit_selfsim
from workflows.wick_check import run_wick_check

COMMANDS = {
    "evolve": run_evolve,
    "fit-selfsim": run_fit_selfsim,
    "residual": run_residual,
    "markov-check": run_markov_check,
    "nonmarkov-compare": run_nonmarkov_compare,
    "breakdown": run_breakdown,
    "wick-check": run_wick_check,
}
TRAJECTORY_COMMANDS = ("fit-selfsim", "residual")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wtkin",
        description="wtkin - isotropic wave-turbulence kinetics",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python wtkin.py evolve --config configs/equilibrium.conf   # Flat trajectory
  python wtkin.py evolve --config configs/blowup.conf        # Finite-time blow-up
  python wtkin.py breakdown --threads 4                      # Closure breakdown scales

For more information, see SETUP.md
        """
    )

    parser.add_argument(
        "command",
        choices=list(COMMANDS),
        help="Command to run"
    )

    parser.add_argument(
        "--config",
        help="Run config file (key = value lines); defaults when omitted"
    )

    parser.add_argument(
        "--out",
        help=f"Output directory (default: {config.OUTPUT_DIR})"
    )

    parser.add_argument(
        "--trajectory",
        help="Trajectory directory read by fit-selfsim and residual"
    )

    parser.add_argument(
        "--threads",
        type=int,
        help="Worker threads; overrides the config file and WTKIN_THREADS"
    )

    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging"
    )

    return parser


def print_banner():
    """Print the wtkin banner"""
    banner = """
    ╔══════════════════════════════════════════════════════════╗
    ║                                                          ║
    ║   wtkin - Isotropic Wave-Turbulence Kinetics             ║
    ║                                                          ║
    ║   Collision integrals, blow-up and closure diagnostics   ║
    ║                                                          ║
    ╚══════════════════════════════════════════════════════════╝
    """
    print(banner)


def load_run_config(path: Optional[str], threads: Optional[int]) -> RunConfig:
    """
    Parse and validate the run config

    Raises:
        ConfigError: unreadable, malformed or inconsistent config
    """
    run_config = RunConfig.from_file(path).apply_environment()
    if threads is not None:
        run_config.threads = threads

    valid, errors = run_config.validate()
    if not valid:
        raise ConfigError("; ".join(errors))
    return run_config


def main(argv=None) -> int:
    """Main entry point; returns the process exit code"""

    print_banner()

    args = build_parser().parse_args(argv)

    if args.debug:
        config.DEBUG = True
    logging.basicConfig(
        level=logging.DEBUG if config.DEBUG else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    # Validate configuration
    valid, errors = config.validate()
    if not valid:
        print("❌ Configuration errors:")
        for error in errors:
            print(f"  - {error}")
        print("\nPlease check your .env file; see .env.example for reference.\n")
        return 1

    try:
        run_config = load_run_config(args.config, args.threads)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}")
        return 1

    out_dir = args.out or config.OUTPUT_DIR
    print(f"Running {args.command} with {run_config.threads} thread(s)...\n")

    runner = COMMANDS[args.command]
    if args.command in TRAJECTORY_COMMANDS:
        results = runner(run_config, out_dir, args.threads, args.trajectory)
    else:
        results = runner(run_config, out_dir, args.threads)

    if results["exit_code"] == 0:
        print("✅ Done")
    elif results["error"]:
        print(f"❌ Error: {results['error']}")
    else:
        failed = [a["name"] for a in results["assertions"] if not a["passed"]]
        print(f"⚠️  Failed assertions: {', '.join(failed)}")
    return results["exit_code"]


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n👋 wtkin interrupted")
        sys.exit(0)
    except Exception as e:
        print(f"\n❌ Unexpected error: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
