"""Support structure generation and near-net shape assembly."""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from app.models.lattice import IndicatorGrid, Lattice, Rotation
from app.models.results import NearNetShape
from app.services.grid import crop, rotate
from app.utils.exceptions import GeometryException, UsageException

logger = logging.getLogger(__name__)

# largest out-of-plane component accepted for a planar build direction
PLANAR_TOLERANCE = 1e-9


def self_support_radius(alpha_deg: float) -> int:
    """Horizontal Chebyshev radius (cells) within which the layer below supports a cell."""
    if not 0.0 < alpha_deg <= 90.0:
        raise GeometryException(f"Overhang angle must lie in (0, 90] degrees, got {alpha_deg}")
    if alpha_deg == 90.0:
        return 0
    return int(math.floor(math.tan(math.radians(90.0 - alpha_deg)) + 1e-9))


def generate_support(part: IndicatorGrid, alpha_deg: float) -> IndicatorGrid:
    """
    Columnar supports from a top-down layer sweep along the build axis.

    A part cell is unsupported when the layer below holds no part or support
    material within the self-support radius. Each unsupported cell seeds a column
    filled straight down through void cells until it meets part material or the
    platform level (layer 0).

    Args:
        part: Part already rotated so the build direction is the build axis
            (+z in 3D, +y for 2D grids)
        alpha_deg: Overhang angle in (0, 90]; 90 projects every down-facing cell

    Returns:
        Support indicator on the part's lattice, disjoint from the part
    """
    radius = self_support_radius(alpha_deg)
    axis = part.lattice.build_axis
    # layers along the last axis
    solid = np.moveaxis(part.cells, axis, -1)
    support = np.zeros_like(solid)
    n_layers = solid.shape[-1]
    footprint = (2 * radius + 1, 1) if part.lattice.is_planar else (2 * radius + 1, 2 * radius + 1)

    for layer in range(n_layers - 1, 0, -1):
        below = solid[..., layer - 1] | support[..., layer - 1]
        if radius > 0:
            below = ndimage.maximum_filter(below, size=footprint, mode="constant", cval=0)
        active = solid[..., layer] & ~below
        if not active.any():
            continue
        for z in range(layer - 1, -1, -1):
            active &= ~solid[..., z]
            if not active.any():
                break
            support[..., z] |= active

    cells = np.moveaxis(support, -1, axis)
    result = IndicatorGrid(part.lattice, cells)
    logger.debug("Generated %d support cells at alpha=%s", result.count, alpha_deg)
    return result


def alignment_rotation(b: Sequence[float], planar: bool = False) -> Rotation:
    """
    Minimal-angle rotation taking b to the build axis (+z, or +y for 2D).

    The antipodal case rotates by pi about +x (about +z for 2D so the part stays in plane).
    Planar parts only accept in-plane directions.
    """
    b = np.asarray(b, dtype=np.float64)
    norm = np.linalg.norm(b)
    if not np.isfinite(norm) or norm == 0.0:
        raise GeometryException(f"Build direction must be non-zero, got {b.tolist()}")
    b = b / norm
    if planar and abs(b[2]) > PLANAR_TOLERANCE:
        raise UsageException(f"Build direction for a planar part must lie in the x-y plane, got {b.tolist()}")
    target = np.array([0.0, 1.0, 0.0]) if planar else np.array([0.0, 0.0, 1.0])
    cos_angle = float(np.clip(b @ target, -1.0, 1.0))
    axis = np.cross(b, target)
    if np.linalg.norm(axis) < 1e-12:
        if cos_angle > 0:
            return Rotation.identity()
        return Rotation.from_axis_angle((0.0, 0.0, 1.0) if planar else (1.0, 0.0, 0.0), math.pi)
    return Rotation.from_axis_angle(axis, math.acos(cos_angle))


def place_on_platform(g: IndicatorGrid) -> IndicatorGrid:
    """
    Crop g to its set cells and move it into the working frame.

    In the working frame the lowest layer sits at build coordinate 0 (the platform
    top) and the other axes are centered on the origin.
    """
    g = crop(g)
    dims = np.asarray(g.lattice.dims)
    lo = -(dims // 2)
    lo[g.lattice.build_axis] = 0
    if g.lattice.is_planar:
        lo[2] = 0
    return IndicatorGrid(Lattice(g.lattice.dims, g.lattice.spacing, tuple(lo * g.lattice.spacing)), g.cells)


def assemble_near_net(
    part: IndicatorGrid,
    b: Sequence[float],
    alpha_deg: float,
    roll_deg: float = 0.0,
) -> NearNetShape:
    """
    Rotate the part so b points along the build axis, then generate its supports.

    Args:
        part: Part indicator in its design frame
        b: Unit build direction
        alpha_deg: Overhang angle
        roll_deg: Optional roll about the build axis applied after alignment

    Returns:
        NearNetShape in the working frame
    """
    planar = part.lattice.is_planar
    if planar and roll_deg:
        raise UsageException("Roll about the build axis would tip a planar part out of plane")
    rotation = alignment_rotation(b, planar=planar)
    if roll_deg:
        rotation = Rotation.from_axis_angle((0.0, 0.0, 1.0), math.radians(roll_deg)) @ rotation

    is_identity = np.allclose(rotation.matrix, np.eye(3), atol=1e-12)
    oriented = part if is_identity else rotate(part, rotation)
    oriented = place_on_platform(oriented)
    support = generate_support(oriented, alpha_deg)
    b = np.asarray(b, dtype=np.float64)
    return NearNetShape(
        part=oriented,
        support=support,
        build_dir=tuple(float(v) for v in b / np.linalg.norm(b)),
        rotation=rotation,
    )
