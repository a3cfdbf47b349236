"""Support Accessibility Engine - command-line application."""
import argparse
import logging
import sys
from typing import List, Optional

from app.commands import imf, optimize, plan, voxelize
from app.config import settings
from app.utils.exceptions import EXIT_INTERNAL, EXIT_USAGE, EngineException, UsageException

logger = logging.getLogger("main")


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with every sub-command registered."""
    parser = argparse.ArgumentParser(
        prog="supportacc",
        description="Support generation, machining accessibility and removal planning on voxel grids",
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    parser.add_argument("--workers", type=int, default=None,
                        help="Worker threads (0 = available parallelism; default from WORKERS)")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="Logging level")

    subparsers = parser.add_subparsers(dest="command", required=True)
    # Include commands
    voxelize.register(subparsers)
    imf.register(subparsers)
    optimize.register(subparsers)
    plan.register(subparsers)
    return parser


def configure_logging(level: str) -> None:
    """Send log records to stderr at the requested level."""
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise UsageException(f"Unknown log level '{level}'")
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(numeric)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and map failures to exit codes.

    Returns:
        0 on success, 2 for usage errors, 3 for input errors, 4 for internal failures
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        configure_logging(args.log_level)
        logger.info("%s v%s: %s", settings.APP_NAME, settings.APP_VERSION, args.command)
        return args.handler(args)
    except EngineException as exc:
        logger.error(exc.detail)
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        logger.exception("Internal failure")
        print("error: internal failure, see log for details", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(run())
