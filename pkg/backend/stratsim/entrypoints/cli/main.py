"""Command-line entrypoint.

    python -m backend.stratsim.entrypoints.cli.main <subcommand> [--config run.toml] [--out dir] ...
"""

import argparse
import json
import sys

from collections.abc import Sequence
from pathlib import Path

from backend.stratsim import bootstrap
from backend.stratsim.constants import EXIT_CONFIG_ERROR
from backend.stratsim.constants import EXIT_NUMERICAL_ABORT
from backend.stratsim.constants import EXIT_OK
from backend.stratsim.constants import EXIT_SELFTEST_FAILED
from backend.stratsim.core.domain import commands
from backend.stratsim.entrypoints.cli.config import RunConfig
from backend.stratsim.entrypoints.cli.config import load_config
from backend.stratsim.foundation.domain.commands import Command
from backend.stratsim.foundation.exceptions import CheckpointFormatError
from backend.stratsim.foundation.exceptions import ConfigurationError
from backend.stratsim.foundation.exceptions import InvalidArgumentError
from backend.stratsim.foundation.exceptions import NumericalAbortError
from backend.stratsim.settings import get_logger
from backend.stratsim.settings import settings

logger = get_logger()

SUBCOMMANDS = {
    "simulate": "integrate one trajectory and write its norm history",
    "sweep": "lifespan sweep along the epsilon and kappa axes with the scaling fit",
    "decay": "linear decay fits per dyadic band",
    "strichartz": "homogeneous and Duhamel Strichartz ratios",
    "symmetry": "time-scaling symmetry check",
    "selftest": "invariant suite",
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per study."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    common.add_argument("--out", type=Path, default=None, help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, default=None, help="data seed (overrides initial.seed)")
    common.add_argument("--emit-plots", action="store_true", help="write matplotlib scripts next to the CSV files")

    parser = argparse.ArgumentParser(prog="stratsim", description="Stratified Boussinesq and dispersive SQG studies")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, description in SUBCOMMANDS.items():
        subparser = subparsers.add_parser(name, parents=[common], help=description)
        if name == "sweep":
            subparser.add_argument("--threads", type=int, default=settings.threads, help="parallel sweep runs")
        if name in ("sweep", "selftest"):
            subparser.add_argument("--quick", action="store_true", help="reduced profile")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Apply the command-line flags that override configuration values."""
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigurationError(f"initial.seed: must be >= 0, got {args.seed}")
        config = config.model_copy(update={"initial": config.initial.model_copy(update={"seed": args.seed})})
    output_updates = {}
    if args.out is not None:
        output_updates["directory"] = args.out
    if args.emit_plots:
        output_updates["emit_plots"] = True
    if output_updates:
        config = config.model_copy(update={"output": config.output.model_copy(update=output_updates)})
    return config


def build_command(args: argparse.Namespace, config: RunConfig) -> Command:
    """Translate the parsed subcommand into its Command.

    Args:
        args (argparse.Namespace): parsed arguments
        config (RunConfig): validated configuration with overrides applied

    Raises:
        ConfigurationError: invalid flag values

    Returns:
        Command: command to dispatch
    """
    match args.subcommand:
        case "simulate":
            return config.simulate_command()
        case "sweep":
            if args.threads < 1:
                raise ConfigurationError(f"--threads must be >= 1, got {args.threads}")
            return config.sweep_command(workers=args.threads, quick=args.quick)
        case "decay":
            return config.decay_command()
        case "strichartz":
            return config.strichartz_command()
        case "symmetry":
            return config.symmetry_command()
        case _:
            return commands.SelftestCommand(seed=config.initial.seed, quick=args.quick)


def _start_debugger():
    # enable remote debugging if DEBUG env variable is set
    if settings.debug:
        import debugpy  # noqa: PLC0415

        logger.debug(json.dumps(settings.model_dump(), indent=2))

        debugpy.listen(("0.0.0.0", 5678))  # noqa S104
        logger.info("debugger listening on port: 5678")

        if settings.wait_for_debugger_connected:
            logger.info("Waiting for debugger to attach...")
            debugpy.wait_for_client()
            logger.info("Debugger attached. Continuing execution.")


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand.

    Args:
        argv (Sequence[str] | None): arguments without the program name. Defaults to sys.argv.

    Returns:
        int: 0 success, 1 failed selftest, 2 configuration error, 3 numerical abort
    """
    args = build_parser().parse_args(argv)
    _start_debugger()
    try:
        config = load_config(args.config) if args.config is not None else RunConfig()
        config = apply_overrides(config, args)
        command = build_command(args, config)
    except (ConfigurationError, InvalidArgumentError) as error:
        logger.error(f"configuration error: {error}")
        return EXIT_CONFIG_ERROR

    bus = bootstrap.bootstrap(out_dir=config.output.directory)
    try:
        bus.handle(command)
    except NumericalAbortError as error:
        logger.error(f"numerical abort after t={error.last_valid_time}: {error}")
        return EXIT_NUMERICAL_ABORT
    except (CheckpointFormatError, ConfigurationError, InvalidArgumentError) as error:
        logger.error(f"invalid run parameters: {error}")
        return EXIT_CONFIG_ERROR

    if isinstance(command, commands.SelftestCommand):
        study = bus.uow.studies.get(command.name)
        if study is None or not study.outcome.get("passed", False):
            return EXIT_SELFTEST_FAILED
    logger.info(f"{command.name} finished, results in {config.output.directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
