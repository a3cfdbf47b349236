"""Voxel lattice operations shared by every downstream service."""
import itertools
import logging
from typing import Optional, Sequence

import numpy as np

from app.models.lattice import (
    BooleanOp,
    IndicatorGrid,
    Lattice,
    Rotation,
    ScalarField,
    ThresholdMode,
)
from app.utils.exceptions import LatticeMismatchException, UsageException

logger = logging.getLogger(__name__)

# Slack (in cells) when deciding whether a rotated cell center lies inside the rotated extent
_EXTENT_TOLERANCE = 1e-9


def volume(g: IndicatorGrid) -> float:
    """Number of set cells times the cell volume (mm³)."""
    return g.volume


def paste(dst: np.ndarray, src: np.ndarray, offset: Sequence[int]) -> None:
    """
    Copy src into dst with src[0,0,0] landing on dst[offset], clipping at the borders.

    Args:
        dst: Destination array (modified in place)
        src: Source array of the same rank
        offset: Integer cell offset of src inside dst (may be negative)
    """
    dst_slices = []
    src_slices = []
    for off, n_src, n_dst in zip(offset, src.shape, dst.shape):
        lo = max(off, 0)
        hi = min(off + n_src, n_dst)
        if hi <= lo:
            return
        dst_slices.append(slice(lo, hi))
        src_slices.append(slice(lo - off, hi - off))
    dst[tuple(dst_slices)] = src[tuple(src_slices)]


def embed(g: IndicatorGrid, lattice: Lattice) -> IndicatorGrid:
    """Resample g onto a co-registered lattice; cells outside g are unset."""
    if g.lattice.same_as(lattice):
        return g
    offset = lattice.cell_offset(g.lattice)
    cells = np.zeros(lattice.dims, dtype=bool)
    paste(cells, g.cells, offset)
    return IndicatorGrid(lattice, cells)


def crop(g: IndicatorGrid) -> IndicatorGrid:
    """Shrink g to the tight bounding box of its set cells (empty grids are returned unchanged)."""
    if g.is_empty:
        return g
    idx = g.set_indices()
    lo = idx.min(axis=0)
    hi = idx.max(axis=0) + 1
    cells = g.cells[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    return IndicatorGrid(g.lattice.resized(lo, hi - lo), cells)


def bbox_centroid(lattice: Lattice) -> np.ndarray:
    """World-frame center of the lattice's bounding box."""
    return np.asarray(lattice.origin) + 0.5 * (np.asarray(lattice.dims) - 1) * lattice.spacing


def rotate(g: IndicatorGrid, r: Rotation, pivot: Optional[Sequence[float]] = None) -> IndicatorGrid:
    """
    Rotate g about a world-frame pivot by nearest-neighbor resampling.

    The output lattice is co-registered with the input and enlarged to bound the
    rotated extent. An output cell is set iff its center, mapped back by the
    inverse rotation, falls in a set input cell.

    Args:
        g: Grid to rotate
        r: Rotation to apply
        pivot: World point kept fixed; defaults to the centroid of g's bounding box

    Returns:
        The rotated grid
    """
    lattice = g.lattice
    s = lattice.spacing
    origin = np.asarray(lattice.origin)
    dims = np.asarray(lattice.dims)
    pivot = bbox_centroid(lattice) if pivot is None else np.asarray(pivot, dtype=np.float64)

    lo_edge = origin - 0.5 * s
    hi_edge = origin + (dims - 0.5) * s
    corners = np.array(list(itertools.product(*zip(lo_edge, hi_edge))))
    moved = r.apply(corners - pivot) + pivot
    m_lo = np.ceil((moved.min(axis=0) - origin) / s - _EXTENT_TOLERANCE).astype(int)
    m_hi = np.floor((moved.max(axis=0) - origin) / s + _EXTENT_TOLERANCE).astype(int)
    out_dims = np.maximum(m_hi - m_lo + 1, 1)
    out_lattice = lattice.resized(m_lo, out_dims)

    if g.is_empty:
        return IndicatorGrid.empty(out_lattice)

    axes = [out_lattice.centers(a) - pivot[a] for a in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    inv = r.matrix.T
    cells = np.zeros(out_lattice.dims, dtype=bool)
    valid = np.ones(out_lattice.dims, dtype=bool)
    src = []
    for a in range(3):
        q = inv[a, 0] * X + inv[a, 1] * Y + inv[a, 2] * Z + pivot[a]
        idx = np.floor((q - origin[a]) / s + 0.5).astype(np.int64)
        valid &= (idx >= 0) & (idx < dims[a])
        src.append(idx)
    cells[valid] = g.cells[src[0][valid], src[1][valid], src[2][valid]]
    logger.debug("rotate %s -> %s", lattice.dims, out_lattice.dims)
    return IndicatorGrid(out_lattice, cells)


def reflect(g: IndicatorGrid) -> IndicatorGrid:
    """Point reflection through world point 0: the cell at offset v is set iff the input cell at -v is set."""
    lattice = g.lattice
    far = np.asarray(lattice.origin) + (np.asarray(lattice.dims) - 1) * lattice.spacing
    reflected = Lattice(lattice.dims, lattice.spacing, tuple(-far))
    return IndicatorGrid(reflected, g.cells[::-1, ::-1, ::-1])


def boolean(a: IndicatorGrid, b: IndicatorGrid, op: BooleanOp) -> IndicatorGrid:
    """
    Cellwise set operation.

    Raises:
        LatticeMismatchException: If a and b do not share a lattice
    """
    if not a.lattice.same_as(b.lattice):
        raise LatticeMismatchException(
            f"Boolean {BooleanOp(op).value} needs a shared lattice: "
            f"{a.lattice.dims}@{a.lattice.origin} vs {b.lattice.dims}@{b.lattice.origin}"
        )
    op = BooleanOp(op)
    if op is BooleanOp.UNION:
        cells = a.cells | b.cells
    elif op is BooleanOp.INTERSECT:
        cells = a.cells & b.cells
    else:
        cells = a.cells & ~b.cells
    return IndicatorGrid(a.lattice, cells)


def union_all(grids: Sequence[IndicatorGrid], lattice: Lattice) -> IndicatorGrid:
    """Union of several grids after embedding each onto lattice."""
    cells = np.zeros(lattice.dims, dtype=bool)
    for g in grids:
        cells |= embed(g, lattice).cells
    return IndicatorGrid(lattice, cells)


def threshold(f: ScalarField, lam: float, mode: ThresholdMode = ThresholdMode.GREATER) -> IndicatorGrid:
    """Cells where f > lam (greater) or f <= lam (leq)."""
    if lam < 0:
        raise UsageException(f"Threshold must be non-negative, got {lam}")
    if ThresholdMode(mode) is ThresholdMode.GREATER:
        return IndicatorGrid(f.lattice, f.cells > lam)
    return IndicatorGrid(f.lattice, f.cells <= lam)
