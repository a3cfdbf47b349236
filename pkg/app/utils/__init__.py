"""Utility functions and classes."""
from app.utils.exceptions import (
    EngineException,
    UsageException,
    InputException,
    LatticeMismatchException,
    GeometryException,
    MeshParseException,
    VolumeFormatException,
    InvariantException,
    NonWatertightMeshWarning,
)
from app.utils.parallel import parallel_map, resolve_workers

__all__ = [
    "EngineException",
    "UsageException",
    "InputException",
    "LatticeMismatchException",
    "GeometryException",
    "MeshParseException",
    "VolumeFormatException",
    "InvariantException",
    "NonWatertightMeshWarning",
    "parallel_map",
    "resolve_workers",
]
