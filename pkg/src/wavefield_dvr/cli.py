from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .config import validate_config
from .errors import ConfigError, ResolutionError
from .experiments import ExperimentRunner

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_RESOLUTION = 3

COMMANDS = {
    "modes": "Solve trapped modes at the configured frequency",
    "dvr-dump": "Write the DVR grid and the chi_j curves",
    "cw": "Reconstruct a tonal field at the configured frequency",
    "pulse": "Synthesise pulse arrival patterns",
    "sweep-frequency": "Fidelity against frequency with confidence ranges",
    "sweep-spacing": "Pulse fidelity against array spacing",
    "profile-compare": "Exact vs noiseless, single noisy and averaged reconstructions",
    "monte-carlo": "Fidelity percentiles over independent noise trials",
}
FREQUENCY_COMMANDS = ("modes", "cw", "profile-compare", "monte-carlo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="DVR wavefield reconstruction experiments")
    parser.add_argument(
        "--config",
        type=Path,
        default=Path.cwd() / "config" / "experiment.json",
        help="Experiment JSON file (default: ./config/experiment.json)",
    )
    parser.add_argument("--seed", type=int, default=None, help="Override noise.seed")
    parser.add_argument("--out-dir", default=None, help="Override output.directory")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for sweeps")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging verbosity (default: INFO)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, description in COMMANDS.items():
        command = subparsers.add_parser(name, help=description)
        if name in FREQUENCY_COMMANDS:
            command.add_argument("--frequency", type=float, default=None, help="Override frequency (Hz)")
    subparsers.add_parser("status", help="Show the latest run log")
    return parser


def handle_run(runner: ExperimentRunner, command: str) -> None:
    for path in runner.run(command):
        print(path)


def handle_status(runner: ExperimentRunner) -> None:
    print(runner.status())


def _build_runner(args: argparse.Namespace) -> ExperimentRunner:
    runner = ExperimentRunner.from_config_file(
        args.config, seed=args.seed, out_dir=args.out_dir, threads=args.threads
    )
    frequency: Optional[float] = getattr(args, "frequency", None)
    if frequency is not None:
        config = replace(runner.config, frequency=frequency)
        validate_config(config)
        runner = ExperimentRunner(config, threads=args.threads)
    return runner


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        runner = _build_runner(args)
        if args.command == "status":
            handle_status(runner)
        else:
            handle_run(runner, args.command)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
