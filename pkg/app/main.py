import argparse
import sys

from loguru import logger
from pydantic import ValidationError

from app.api.base import COMMON_OPTIONS, OPTIONS
from app.api.routers import all_commands
from app.config.experiment import ExperimentConfig
from app.config.main import settings
from app.exceptions.base import BaseNumericError, ValidationFailure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renewal-tauber", description="Численная проверка тауберовых теорем для отображений LSV"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in all_commands:
        sub = subparsers.add_parser(command.name, help=command.summary, description=command.summary)
        for option in (*COMMON_OPTIONS, *command.options):
            flags, kwargs = OPTIONS[option]
            sub.add_argument(*flags, **kwargs)
    return parser


def main(argv: list[str] | None = None) -> int:
    logger.remove()
    logger.add(sys.stderr, level=settings.LOG_LEVEL)

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else ValidationFailure.exit_code

    command = next(command for command in all_commands if command.name == args.command)
    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    try:
        config = ExperimentConfig.load(args.config, experiment=command.name, **overrides)
        paths = command.handler(config)
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e.errors()[0]['msg']}")
        return ValidationFailure.exit_code
    except BaseNumericError as e:
        logger.error(f"Error: {str(e)}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"{e}")
        return 1

    for path in paths:
        logger.info(f"Saved {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
