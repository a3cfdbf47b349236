"""Voxel lattice, indicator grid, scalar field and rotation types."""
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation as SciRotation

from app.utils.exceptions import GeometryException, LatticeMismatchException

# Origins closer than this (in cells) to an integer offset count as co-registered
REGISTRATION_TOLERANCE = 1e-6


class BooleanOp(str, enum.Enum):
    """Cellwise set operation."""
    UNION = "union"
    INTERSECT = "intersect"
    SUBTRACT = "subtract"


class ThresholdMode(str, enum.Enum):
    """Comparison used when thresholding a scalar field."""
    GREATER = "greater"
    LEQ = "leq"


@dataclass(frozen=True)
class Lattice:
    """Axis-aligned lattice: cell counts, uniform spacing (mm) and the world center of cell (0,0,0)."""

    dims: Tuple[int, int, int]
    spacing: float
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise GeometryException(f"Lattice dims must be three positive integers, got {self.dims}")
        spacing = float(self.spacing)
        if not math.isfinite(spacing) or spacing <= 0:
            raise GeometryException(f"Lattice spacing must be positive, got {self.spacing}")
        origin = tuple(float(o) for o in self.origin)
        if len(origin) != 3 or not all(math.isfinite(o) for o in origin):
            raise GeometryException(f"Lattice origin must be a finite triple, got {self.origin}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def size(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def cell_volume(self) -> float:
        return self.spacing ** 3

    @property
    def is_planar(self) -> bool:
        """True for 2D cases stored as a single z layer."""
        return self.dims[2] == 1

    @property
    def build_axis(self) -> int:
        """Array axis that points along the build direction: y for 2D, z for 3D."""
        return 1 if self.is_planar else 2

    @property
    def origin_cells(self) -> np.ndarray:
        """Origin expressed in cells (world / spacing)."""
        return np.asarray(self.origin) / self.spacing

    def cell_offset(self, other: "Lattice") -> Tuple[int, int, int]:
        """
        Integer cell offset of other's origin relative to this origin.

        Raises:
            LatticeMismatchException: If spacings differ or the offset is fractional
        """
        if not math.isclose(self.spacing, other.spacing, rel_tol=1e-9):
            raise LatticeMismatchException(
                f"Spacing mismatch: {self.spacing} mm vs {other.spacing} mm"
            )
        raw = (np.asarray(other.origin) - np.asarray(self.origin)) / self.spacing
        rounded = np.floor(raw + 0.5)
        if np.max(np.abs(raw - rounded)) > REGISTRATION_TOLERANCE:
            raise LatticeMismatchException(
                f"Lattice origins {self.origin} and {other.origin} are not a whole number of cells apart"
            )
        return tuple(int(v) for v in rounded)

    def is_co_registered(self, other: "Lattice") -> bool:
        try:
            self.cell_offset(other)
        except LatticeMismatchException:
            return False
        return True

    def same_as(self, other: "Lattice") -> bool:
        """True when both lattices cover exactly the same cells."""
        return self.dims == other.dims and self.is_co_registered(other) and self.cell_offset(other) == (0, 0, 0)

    def shifted(self, cells: Sequence[int]) -> "Lattice":
        """Lattice with the same dims whose origin moved by a whole number of cells."""
        origin = tuple(o + c * self.spacing for o, c in zip(self.origin, cells))
        return Lattice(self.dims, self.spacing, origin)

    def resized(self, lo: Sequence[int], dims: Sequence[int]) -> "Lattice":
        """Co-registered lattice starting lo cells from this origin with the given dims."""
        return Lattice(tuple(dims), self.spacing, self.shifted(lo).origin)

    def centers(self, axis: int) -> np.ndarray:
        """World coordinates of cell centers along one axis."""
        return self.origin[axis] + self.spacing * np.arange(self.dims[axis])


def bounding_lattice(lattices: Iterable[Lattice]) -> Lattice:
    """Smallest lattice, co-registered with the first, covering every given lattice."""
    lattices = list(lattices)
    base = lattices[0]
    lo = np.zeros(3, dtype=int)
    hi = np.asarray(base.dims, dtype=int)
    for lattice in lattices[1:]:
        offset = np.asarray(base.cell_offset(lattice))
        lo = np.minimum(lo, offset)
        hi = np.maximum(hi, offset + np.asarray(lattice.dims))
    return base.resized(lo, hi - lo)


@dataclass(frozen=True, eq=False)
class IndicatorGrid:
    """Binary voxel field; the cell array is read-only."""

    lattice: Lattice
    cells: np.ndarray

    def __post_init__(self):
        arr = np.array(self.cells, dtype=bool, copy=True)
        if arr.shape != self.lattice.dims:
            raise GeometryException(
                f"Cell array shape {arr.shape} does not match lattice dims {self.lattice.dims}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @classmethod
    def empty(cls, lattice: Lattice) -> "IndicatorGrid":
        return cls(lattice, np.zeros(lattice.dims, dtype=bool))

    @classmethod
    def full(cls, lattice: Lattice) -> "IndicatorGrid":
        return cls(lattice, np.ones(lattice.dims, dtype=bool))

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.cells))

    @property
    def is_empty(self) -> bool:
        return not self.cells.any()

    @property
    def volume(self) -> float:
        return self.count * self.lattice.cell_volume

    def set_indices(self) -> np.ndarray:
        """(n, 3) array of set cell indices in lexicographic order."""
        return np.argwhere(self.cells)

    def __repr__(self):
        return f"<IndicatorGrid dims={self.lattice.dims} set={self.count}>"


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real-valued voxel field; the cell array is read-only."""

    lattice: Lattice
    cells: np.ndarray

    def __post_init__(self):
        arr = np.array(self.cells, dtype=np.float64, copy=True)
        if arr.shape != self.lattice.dims:
            raise GeometryException(
                f"Cell array shape {arr.shape} does not match lattice dims {self.lattice.dims}"
            )
        if not np.all(np.isfinite(arr)):
            raise GeometryException("Scalar field values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @classmethod
    def constant(cls, lattice: Lattice, value: float) -> "ScalarField":
        return cls(lattice, np.full(lattice.dims, float(value)))

    def __repr__(self):
        return f"<ScalarField dims={self.lattice.dims} range=[{self.cells.min():.4g}, {self.cells.max():.4g}]>"


@dataclass(frozen=True, eq=False)
class Rotation:
    """Proper rotation stored as a 3x3 orthonormal matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise GeometryException("Rotation matrix must be a finite 3x3 array")
        if not np.allclose(m.T @ m, np.eye(3), rtol=0.0, atol=1e-9):
            raise GeometryException("Rotation matrix is not orthonormal")
        if abs(np.linalg.det(m) - 1.0) > 1e-9:
            raise GeometryException("Rotation matrix determinant is not +1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.eye(3))

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> "Rotation":
        """Rotation by angle (radians) about axis, right-handed."""
        axis = np.asarray(axis, dtype=np.float64)
        norm = np.linalg.norm(axis)
        if axis.shape != (3,) or not np.isfinite(norm) or norm == 0.0:
            raise GeometryException(f"Rotation axis must be a non-zero 3-vector, got {axis.tolist()}")
        return cls(SciRotation.from_rotvec(axis / norm * float(angle)).as_matrix())

    @classmethod
    def about_z(cls, angle: float) -> "Rotation":
        """Planar rotation R(angle) used by the 2D cases."""
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))

    @property
    def inverse(self) -> "Rotation":
        return Rotation(self.matrix.T)

    def apply(self, vectors) -> np.ndarray:
        """Rotate a 3-vector or an (n, 3) array of vectors."""
        return np.asarray(vectors, dtype=np.float64) @ self.matrix.T

    def __matmul__(self, other: "Rotation") -> "Rotation":
        return Rotation(self.matrix @ other.matrix)

    def __repr__(self):
        rotvec = SciRotation.from_matrix(self.matrix).as_rotvec()
        return f"<Rotation rotvec={np.round(rotvec, 4).tolist()}>"
