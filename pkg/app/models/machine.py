"""Machining setup model: tool assemblies, fixturing configurations and the platform."""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from app.config import settings
from app.models.lattice import IndicatorGrid, Rotation
from app.utils.exceptions import GeometryException, LatticeMismatchException

Offset = Tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class ToolAssembly:
    """
    Holder plus cutter on one tool-frame lattice.

    World point 0 of the tool frame is the registration origin. Sharp points are
    integer cell offsets from it and must sit in cutter cells.
    """

    holder: IndicatorGrid
    cutter: IndicatorGrid
    sharp_points: Tuple[Offset, ...]
    rotations: Tuple[Rotation, ...]
    name: str = "tool"

    def __post_init__(self):
        lattice = self.holder.lattice
        if not lattice.same_as(self.cutter.lattice):
            raise LatticeMismatchException(f"Tool '{self.name}': holder and cutter lattices differ")
        origin_cells = lattice.origin_cells
        if np.max(np.abs(origin_cells - np.floor(origin_cells + 0.5))) > 1e-6:
            raise LatticeMismatchException(
                f"Tool '{self.name}': lattice origin must lie a whole number of cells from the registration origin"
            )
        if np.any(self.holder.cells & self.cutter.cells):
            raise GeometryException(f"Tool '{self.name}': holder and cutter overlap")
        if self.cutter.is_empty:
            raise GeometryException(f"Tool '{self.name}': cutter is empty")
        if not self.rotations:
            raise GeometryException(f"Tool '{self.name}': rotation set is empty")

        points = tuple(tuple(int(v) for v in k) for k in self.sharp_points)
        for k in points:
            idx = self.offset_to_index(k)
            inside = all(0 <= i < n for i, n in zip(idx, lattice.dims))
            if not inside or not self.cutter.cells[idx]:
                raise GeometryException(f"Tool '{self.name}': sharp point {k} is not a cutter cell")
        object.__setattr__(self, "sharp_points", points)
        object.__setattr__(self, "rotations", tuple(self.rotations))

    def offset_to_index(self, k: Offset) -> Offset:
        base = np.floor(self.holder.lattice.origin_cells + 0.5).astype(int)
        return tuple(int(v) for v in np.asarray(k) - base)

    def index_to_offset(self, idx) -> Offset:
        base = np.floor(self.holder.lattice.origin_cells + 0.5).astype(int)
        return tuple(int(v) for v in np.asarray(idx) + base)

    @property
    def body(self) -> IndicatorGrid:
        """Implicit union of holder and cutter."""
        return IndicatorGrid(self.holder.lattice, self.holder.cells | self.cutter.cells)

    @property
    def volume(self) -> float:
        return self.body.volume

    @property
    def axis(self) -> np.ndarray:
        """Unit vector from the cutter centroid toward the holder centroid (+y when undefined)."""
        if self.holder.is_empty:
            return np.array([0.0, 1.0, 0.0])
        delta = self.holder.set_indices().mean(axis=0) - self.cutter.set_indices().mean(axis=0)
        norm = np.linalg.norm(delta)
        if norm == 0.0:
            return np.array([0.0, 1.0, 0.0])
        return delta / norm

    def __repr__(self):
        return f"<ToolAssembly {self.name}: {self.body.count} cells, {len(self.rotations)} rotations, {len(self.sharp_points)} sharp points>"


@dataclass(frozen=True, eq=False)
class FixtureConfig:
    """One clamping arrangement, given in the near-net working frame."""

    body: IndicatorGrid
    name: str = "fixture"

    def __repr__(self):
        return f"<FixtureConfig {self.name}: {self.body.count} cells>"


@dataclass(frozen=True, eq=False)
class MachineSetup:
    """
    Platform, fixturing configurations and tool assemblies.

    When no explicit platform grid is given, a slab of platform_thickness cells is
    placed directly beneath the near-net shape, widened by platform_margin cells.
    """

    fixtures: Tuple[FixtureConfig, ...]
    tools: Tuple[ToolAssembly, ...]
    platform: Optional[IndicatorGrid] = None
    platform_thickness: int = field(default_factory=lambda: settings.PLATFORM_THICKNESS)
    platform_margin: int = field(default_factory=lambda: settings.PLATFORM_MARGIN)

    def __post_init__(self):
        object.__setattr__(self, "fixtures", tuple(self.fixtures))
        object.__setattr__(self, "tools", tuple(self.tools))
        if not self.fixtures:
            raise GeometryException("A machine setup needs at least one fixturing configuration")
        if not self.tools:
            raise GeometryException("A machine setup needs at least one tool assembly")
        if self.platform is not None and self.platform.is_empty:
            raise GeometryException("Platform grid is empty")
        if self.platform is None and self.platform_thickness < 1:
            raise GeometryException("Platform thickness must be at least one cell")
        if self.platform_margin < 0:
            raise GeometryException("Platform margin must be non-negative")

    @property
    def spacing(self) -> float:
        return self.tools[0].holder.lattice.spacing
