"""Machining setup construction: sharp points, orientation sets, tool registration and the platform slab."""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from app.models.lattice import IndicatorGrid, Lattice, Rotation
from app.models.machine import MachineSetup, Offset, ToolAssembly
from app.utils.exceptions import GeometryException, UsageException

logger = logging.getLogger(__name__)

# Eighteen tool orientations for a tool initially pointing along (0, 1, 0)
STANDARD_18: List[Tuple[Tuple[float, float, float], float]] = [
    ((1, 0, 0), 0.0),
    ((1, 0, 0), math.pi),
    ((1, 0, 0), math.pi / 2),
    ((1, 0, 0), 3 * math.pi / 2),
    ((1, 0, 0), math.pi / 4),
    ((1, 0, 0), 3 * math.pi / 4),
    ((1, 0, 0), 5 * math.pi / 4),
    ((1, 0, 0), 7 * math.pi / 4),
    ((0, 0, 1), math.pi / 2),
    ((0, 0, 1), 3 * math.pi / 2),
    ((0, 0, 1), math.pi / 4),
    ((0, 0, 1), 3 * math.pi / 4),
    ((0, 0, 1), 5 * math.pi / 4),
    ((0, 0, 1), 7 * math.pi / 4),
    ((1, 0, 1), math.pi / 2),
    ((1, 0, 1), 3 * math.pi / 2),
    ((1, 0, -1), math.pi / 2),
    ((1, 0, -1), 3 * math.pi / 2),
]


def orientation_set(spec: Sequence[Tuple[Sequence[float], float]]) -> List[Rotation]:
    """
    Rotations R_a(theta) for a list of (axis, angle in radians) pairs.

    Raises:
        GeometryException: If an axis is zero
    """
    return [Rotation.from_axis_angle(axis, angle) for axis, angle in spec]


def uniform2d(n: int) -> List[Rotation]:
    """Planar rotations R(2*pi*i/n) for i = 0..n-1."""
    if n < 1:
        raise UsageException(f"Planar orientation count must be at least 1, got {n}")
    return [Rotation.about_z(2.0 * math.pi * i / n) for i in range(n)]


def boundary_cells(g: IndicatorGrid) -> np.ndarray:
    """Set cells with at least one face neighbor outside g (in-plane neighbors only for 2D)."""
    shape = tuple(3 if n > 1 else 1 for n in g.lattice.dims)
    structure = np.zeros(shape, dtype=bool)
    center = tuple(n // 2 for n in shape)
    structure[center] = True
    for axis, n in enumerate(shape):
        if n == 3:
            for side in (0, 2):
                idx = list(center)
                idx[axis] = side
                structure[tuple(idx)] = True
    interior = ndimage.binary_erosion(g.cells, structure=structure, border_value=0)
    return g.cells & ~interior


def default_sharp_points(tool: ToolAssembly, n_k: int) -> List[Offset]:
    """
    Cutter boundary cells farthest from the holder centroid along the tool axis.

    Ties are broken by lexicographic cell index. When n_k exceeds the number of
    boundary cells, every boundary cell is returned.
    """
    if n_k < 1:
        raise UsageException(f"Sharp point count must be at least 1, got {n_k}")
    cells = np.argwhere(boundary_cells(tool.cutter))
    reference = tool.holder.set_indices().mean(axis=0) if not tool.holder.is_empty else tool.cutter.set_indices().mean(axis=0)
    depth = np.round((cells - reference) @ (-tool.axis), 9)
    order = np.lexsort((cells[:, 2], cells[:, 1], cells[:, 0], -depth))
    chosen = cells[order[:n_k]]
    return [tool.index_to_offset(idx) for idx in chosen]


def build_tool(
    holder: IndicatorGrid,
    cutter: IndicatorGrid,
    rotations: Sequence[Rotation],
    name: str = "tool",
    sharp_points: Optional[Sequence[Sequence[int]]] = None,
    n_sharp_points: int = 10,
) -> ToolAssembly:
    """
    Build a tool assembly registered at its first sharp point.

    Args:
        holder: Holder indicator (H)
        cutter: Cutter indicator (K), same lattice as the holder
        rotations: Allowed rotation set
        name: Tool name used in reports
        sharp_points: Explicit sharp points as cell indices into the cutter grid;
            None selects n_sharp_points by the default rule
        n_sharp_points: Count for the default rule

    Returns:
        A ToolAssembly whose registration origin is the first sharp point's cell
    """
    if not holder.lattice.same_as(cutter.lattice):
        raise GeometryException(f"Tool '{name}': holder and cutter must share a lattice")
    local = Lattice(holder.lattice.dims, holder.lattice.spacing)
    unregistered = ToolAssembly(
        holder=IndicatorGrid(local, holder.cells),
        cutter=IndicatorGrid(local, cutter.cells),
        sharp_points=(),
        rotations=tuple(rotations),
        name=name,
    )
    if sharp_points is None:
        points = default_sharp_points(unregistered, n_sharp_points)
    else:
        points = [tuple(int(v) for v in k) for k in sharp_points]
    if not points:
        raise GeometryException(f"Tool '{name}': no sharp points")

    anchor = np.asarray(points[0])
    registered = Lattice(local.dims, local.spacing, tuple(-anchor * local.spacing))
    tool = ToolAssembly(
        holder=IndicatorGrid(registered, holder.cells),
        cutter=IndicatorGrid(registered, cutter.cells),
        sharp_points=tuple(tuple(int(v) for v in np.asarray(k) - anchor) for k in points),
        rotations=tuple(rotations),
        name=name,
    )
    logger.debug("Built %r", tool)
    return tool


def platform_slab(lattice: Lattice, thickness: int, margin: int) -> IndicatorGrid:
    """Solid slab of thickness cells directly beneath a lattice along its build axis, widened by margin."""
    axis = lattice.build_axis
    lo = np.array([-margin, -margin, 0 if lattice.is_planar else -margin])
    dims = np.asarray(lattice.dims) + 2 * np.abs(lo)
    lo[axis] = -thickness
    dims[axis] = thickness
    return IndicatorGrid.full(lattice.resized(lo, dims))


def platform_for(setup: MachineSetup, lattice: Lattice) -> IndicatorGrid:
    """The setup's explicit platform, or a slab under the given near-net lattice."""
    if setup.platform is not None:
        return setup.platform
    return platform_slab(lattice, setup.platform_thickness, setup.platform_margin)


def approach_direction(tool: ToolAssembly, rotation: Rotation) -> Tuple[float, float, float]:
    """Rotated tool axis, rounded for reporting."""
    direction = rotation.apply(tool.axis)
    return tuple(float(v) + 0.0 for v in np.round(direction, 2))
