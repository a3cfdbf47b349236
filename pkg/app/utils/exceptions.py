"""Custom exception classes."""
from typing import Optional

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


class EngineException(Exception):
    """Base class for errors that end a command with a specific exit code."""

    exit_code: int = EXIT_INTERNAL

    def __init__(self, detail: str = "Engine failure", exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class UsageException(EngineException):
    """Exception raised for invalid command-line usage or parameter values."""

    exit_code = EXIT_USAGE

    def __init__(self, detail: str = "Invalid usage"):
        super().__init__(detail)


class InputException(EngineException):
    """Exception raised when input files or configs cannot be used."""

    exit_code = EXIT_INPUT

    def __init__(self, detail: str = "Invalid input"):
        super().__init__(detail)


class LatticeMismatchException(InputException):
    """Exception raised when two grids are not co-registered."""

    def __init__(self, detail: str = "Grids do not share a lattice; co-register them first"):
        super().__init__(detail)


class GeometryException(InputException):
    """Exception raised for degenerate or out-of-range geometric parameters."""

    def __init__(self, detail: str = "Invalid geometry"):
        super().__init__(detail)


class MeshParseException(InputException):
    """Exception raised when a mesh file is malformed."""

    def __init__(self, detail: str = "Malformed mesh file", byte_offset: Optional[int] = None):
        if byte_offset is not None:
            detail = f"{detail} (at byte {byte_offset})"
        super().__init__(detail)
        self.byte_offset = byte_offset


class VolumeFormatException(InputException):
    """Exception raised when a volume file header and payload disagree."""

    def __init__(self, detail: str = "Malformed volume file"):
        super().__init__(detail)


class InvariantException(EngineException):
    """Exception raised when an internal invariant check fails."""

    exit_code = EXIT_INTERNAL

    def __init__(self, detail: str = "Internal invariant violated"):
        super().__init__(detail)


class NonWatertightMeshWarning(UserWarning):
    """Warning emitted when a mesh has boundary edges; parity results are undefined there."""
