"""Shared argparse types and options."""
import argparse

from app.dependencies import parse_direction
from app.utils.exceptions import UsageException


def positive_float(text: str) -> float:
    """argparse type for strictly positive numbers."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{text}'")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def direction(text: str):
    """argparse type for build directions given as 'x,y,z' or 'x,y'."""
    try:
        return parse_direction(text)
    except UsageException as exc:
        raise argparse.ArgumentTypeError(exc.detail)


def add_accessibility_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=None, help="Secluded threshold on the field")
    parser.add_argument("--alpha", dest="alpha_deg", type=float, default=None, help="Overhang angle in degrees")
    parser.add_argument("--roll", dest="roll_deg", type=float, default=None, help="Roll about the build axis (deg)")
