"""Sub-commands of the command-line interface; each module exposes register(subparsers)."""
from app.commands import imf, optimize, plan, voxelize

__all__ = ["voxelize", "imf", "optimize", "plan"]
