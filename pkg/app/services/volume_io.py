"""
Geometry ingestion and result serialization.

Meshes enter as STL (binary or ASCII) and are voxelized by center sampling with
a ray-parity test along +x. Grids and fields are stored in a small native
volume format: an ASCII header followed by a little-endian payload.

    VOXV 1
    dims 64 64 64
    spacing 0.5
    origin 0.25 0.25 0.25
    dtype bit
    end
    <payload>
"""
import io
import logging
import math
import re
import warnings
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import stl
from stl import mesh as stl_mesh

from app.models.lattice import IndicatorGrid, Lattice, ScalarField
from app.models.mesh import TriangleMesh
from app.utils.exceptions import (
    GeometryException,
    InputException,
    MeshParseException,
    NonWatertightMeshWarning,
    UsageException,
    VolumeFormatException,
)
from app.utils.parallel import parallel_map, resolve_workers

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Volume = Union[IndicatorGrid, ScalarField]

VOLUME_MAGIC = "VOXV"
VOLUME_VERSION = "1"

# facet layout of an ASCII STL; None marks a number
ASCII_FACET: Tuple[Optional[bytes], ...] = (
    b"facet", b"normal", None, None, None, b"outer", b"loop",
    *(b"vertex", None, None, None) * 3,
    b"endloop", b"endfacet",
)

# Barycentric slack (relative) below which a ray counts as hitting an edge or vertex
EDGE_EPSILON = 1e-10
# Deterministic ray offsets (in cells) tried in order for rows with degenerate hits
RAY_JITTER: Tuple[Tuple[float, float], ...] = (
    (1.3e-3, 2.1e-3),
    (-2.7e-3, 1.7e-3),
    (4.1e-3, -3.3e-3),
    (-5.3e-3, -4.7e-3),
)


# ── mesh input ──────────────────────────────────────────────────────────────


def _read_bytes(path: PathLike, kind: str) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise InputException(f"{kind} file not found: {path}")
    return path.read_bytes()


def _locate_ascii_error(data: bytes) -> Optional[Tuple[str, int]]:
    """First token breaking the ASCII STL grammar, or None if the layout is sound."""
    tokens = [(m.group().lower(), m.start()) for m in re.finditer(rb"\S+", data)]
    i = 1
    while i < len(tokens) and tokens[i][0] not in (b"facet", b"endsolid"):
        i += 1
    while i < len(tokens) and tokens[i][0] != b"endsolid":
        for expected in ASCII_FACET:
            if i >= len(tokens):
                return "Unexpected end of ASCII STL", len(data)
            token, offset = tokens[i]
            found = token.decode(errors="replace")
            if expected is None:
                try:
                    float(token)
                except ValueError:
                    return f"Expected a number, found '{found}'", offset
            elif token != expected:
                return f"Expected '{expected.decode()}', found '{found}'", offset
            i += 1
    if i >= len(tokens):
        return "Unexpected end of ASCII STL", len(data)
    return None


def load_mesh(path: PathLike) -> TriangleMesh:
    """
    Read a binary or ASCII STL file with numpy-stl.

    A file whose size is exactly 84 + 50 n bytes, where n is the triangle count
    stored at byte 80, is read as binary; anything else starting with "solid" is
    read as ASCII.

    Raises:
        InputException: If the file does not exist
        MeshParseException: If the file is malformed, with the failing byte offset
    """
    data = _read_bytes(path, "Mesh")
    n_declared = None
    if len(data) >= stl.HEADER_SIZE + stl.COUNT_SIZE:
        n_declared = int(np.frombuffer(data, dtype="<u4", count=1, offset=stl.HEADER_SIZE)[0])
        expected = stl.HEADER_SIZE + stl.COUNT_SIZE + stl_mesh.Mesh.dtype.itemsize * n_declared

    if n_declared is not None and len(data) == expected:
        mode = stl.Mode.BINARY
    elif data.lstrip()[:5].lower() == b"solid":
        mode = stl.Mode.ASCII
    elif n_declared is None:
        raise MeshParseException("File too short for a binary STL header", byte_offset=len(data))
    else:
        raise MeshParseException(
            f"Binary STL declares {n_declared} triangles ({expected} bytes) but the file holds {len(data)} bytes",
            byte_offset=min(len(data), expected),
        )

    try:
        loaded = stl_mesh.Mesh.from_file(
            str(path), calculate_normals=False, fh=io.BytesIO(data), mode=mode, speedups=False
        )
    except (RuntimeError, ValueError, AssertionError) as exc:
        reason, offset = _locate_ascii_error(data) or (f"Unreadable STL: {exc}", len(data))
        raise MeshParseException(reason, byte_offset=offset)

    if len(loaded.vectors) == 0:
        raise MeshParseException("Mesh has no triangles", byte_offset=len(data))
    name = ""
    if mode == stl.Mode.ASCII:
        raw = loaded.name
        name = (raw.decode(errors="replace") if isinstance(raw, bytes) else str(raw)).strip()
    mesh = TriangleMesh(loaded.vectors.astype(np.float64), name=name or Path(path).stem)
    logger.debug("Loaded %r from %s", mesh, path)
    return mesh


def boundary_edge_count(mesh: TriangleMesh) -> int:
    """Number of edges not shared by exactly two triangles."""
    _, inverse = np.unique(mesh.triangles.reshape(-1, 3), axis=0, return_inverse=True)
    faces = np.asarray(inverse).reshape(-1, 3)
    edges = np.sort(np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]), axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    return int(np.count_nonzero(counts != 2))


# ── voxelization ────────────────────────────────────────────────────────────


def _parity_toggles(
    triangles: np.ndarray,
    points: np.ndarray,
    x0: float,
    spacing: float,
    nx: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Crossing toggles for rays cast along +x through (y, z) points.

    toggles[m, i] flips once for every crossing between cell centers i - 1 and i.
    Rows that touch a triangle edge or vertex are flagged as degenerate.
    """
    toggles = np.zeros((len(points), nx + 1), dtype=np.uint8)
    degenerate = np.zeros(len(points), dtype=bool)
    py, pz = points[:, 0], points[:, 1]
    area_floor = 1e-12 * spacing * spacing

    for (ax, ay, az), (bx, by, bz), (cx, cy, cz) in triangles:
        det = (by - ay) * (cz - az) - (bz - az) * (cy - ay)
        if abs(det) < area_floor:
            continue
        sel = np.flatnonzero(
            (py >= min(ay, by, cy)) & (py <= max(ay, by, cy)) & (pz >= min(az, bz, cz)) & (pz <= max(az, bz, cz))
        )
        if not sel.size:
            continue
        dy = py[sel] - ay
        dz = pz[sel] - az
        w1 = (dy * (cz - az) - dz * (cy - ay)) / det
        w2 = ((by - ay) * dz - (bz - az) * dy) / det
        w0 = 1.0 - w1 - w2
        weights = np.stack([w0, w1, w2])
        inside = np.all(weights >= -EDGE_EPSILON, axis=0)
        on_edge = inside & np.any(np.abs(weights) <= EDGE_EPSILON, axis=0)
        degenerate[sel[on_edge]] = True
        hit = inside & ~on_edge
        if not hit.any():
            continue
        x_hit = w0[hit] * ax + w1[hit] * bx + w2[hit] * cx
        first = np.clip(np.floor((x_hit - x0) / spacing) + 1, 0, nx).astype(np.int64)
        np.bitwise_xor.at(toggles, (sel[hit], first), 1)
    return toggles, degenerate


def _voxelize_rows(triangles: np.ndarray, points: np.ndarray, lattice: Lattice) -> np.ndarray:
    s = lattice.spacing
    nx = lattice.dims[0]
    x0 = lattice.origin[0]
    toggles, degenerate = _parity_toggles(triangles, points, x0, s, nx)
    for dy, dz in RAY_JITTER:
        if not degenerate.any():
            break
        rows = np.flatnonzero(degenerate)
        moved = points[rows] + np.array([dy * s, dz * s])
        toggles[rows], degenerate[rows] = _parity_toggles(triangles, moved, x0, s, nx)
    if degenerate.any():
        logger.debug("%d rays still graze mesh edges after jitter", int(degenerate.sum()))
    return (np.cumsum(toggles[:, :nx], axis=1) % 2).astype(bool)


def _voxelize_slab(triangles: np.ndarray, lattice: Lattice, z_index: np.ndarray) -> np.ndarray:
    ys = lattice.centers(1)
    zs = lattice.centers(2)[z_index]
    # keep triangles overlapping the slab
    tz = triangles[:, :, 2]
    near = (tz.max(axis=1) >= zs.min()) & (tz.min(axis=1) <= zs.max())
    Y, Z = np.meshgrid(ys, zs, indexing="ij")
    points = np.stack([Y.ravel(), Z.ravel()], axis=1)
    rows = _voxelize_rows(triangles[near], points, lattice)
    return rows.reshape(len(ys), len(zs), lattice.dims[0]).transpose(2, 0, 1)


def voxelize(mesh: TriangleMesh, spacing: float, workers: Optional[int] = None) -> IndicatorGrid:
    """
    Center-sampled indicator of a closed triangle mesh.

    Cell centers lie at half-integer multiples of spacing, so the lattice covers
    the mesh bounds exactly when they fall on multiples of spacing. A cell is set
    iff an +x ray from its center's row crosses the surface an odd number of times
    before the center. Rays grazing an edge or vertex are recast with a small fixed
    offset.

    Args:
        mesh: Triangle mesh in mm
        spacing: Cell size in mm
        workers: Threads used over z-slabs

    Raises:
        UsageException: If spacing is not positive
        GeometryException: If any vertex is not finite
    """
    if not math.isfinite(spacing) or spacing <= 0:
        raise UsageException(f"Spacing must be positive, got {spacing}")
    triangles = mesh.triangles
    if not np.all(np.isfinite(triangles)):
        raise GeometryException("Mesh has non-finite vertex coordinates")
    if len(mesh) == 0:
        raise GeometryException("Mesh has no triangles")

    open_edges = boundary_edge_count(mesh)
    if open_edges:
        message = f"Mesh '{mesh.name}' has {open_edges} boundary edges; voxel content there is undefined"
        logger.warning(message)
        warnings.warn(message, NonWatertightMeshWarning, stacklevel=2)

    lo_corner, hi_corner = mesh.bounds
    lo = np.floor(lo_corner / spacing)
    hi = np.ceil(hi_corner / spacing)
    dims = np.maximum(hi - lo, 1).astype(int)
    lattice = Lattice(tuple(dims), spacing, tuple((lo + 0.5) * spacing))

    workers = resolve_workers(workers)
    slabs = [z for z in np.array_split(np.arange(dims[2]), min(workers, dims[2])) if z.size]
    parts = parallel_map(lambda z: _voxelize_slab(triangles, lattice, z), slabs, workers)
    grid = IndicatorGrid(lattice, np.concatenate(parts, axis=2))
    logger.debug("Voxelized %r into %s", mesh, grid)
    return grid


# ── volume files ────────────────────────────────────────────────────────────


def write_volume(path: PathLike, volume: Volume) -> Path:
    """Write a grid (dtype bit) or field (dtype f64) with its lattice metadata."""
    path = Path(path)
    lattice = volume.lattice
    if isinstance(volume, IndicatorGrid):
        dtype = "bit"
        payload = np.packbits(volume.cells.ravel(), bitorder="little").tobytes()
    else:
        dtype = "f64"
        payload = volume.cells.astype("<f8").tobytes()
    header = "\n".join([
        f"{VOLUME_MAGIC} {VOLUME_VERSION}",
        "dims " + " ".join(str(n) for n in lattice.dims),
        f"spacing {lattice.spacing!r}",
        "origin " + " ".join(repr(o) for o in lattice.origin),
        f"dtype {dtype}",
        "end",
        "",
    ])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header.encode("ascii") + payload)
    return path


def _header_fields(data: bytes) -> Tuple[dict, bytes]:
    marker = b"\nend\n"
    cut = data.find(marker)
    if cut < 0:
        raise VolumeFormatException("Volume header is not terminated by 'end'")
    try:
        lines = data[:cut].decode("ascii").split("\n")
    except UnicodeDecodeError:
        raise VolumeFormatException("Volume header is not ASCII")
    if lines[0].split() != [VOLUME_MAGIC, VOLUME_VERSION]:
        raise VolumeFormatException(f"Not a {VOLUME_MAGIC} {VOLUME_VERSION} volume file")
    fields = {}
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        fields[key] = value.split()
    return fields, data[cut + len(marker):]


def read_volume(path: PathLike) -> Volume:
    """
    Read a volume file back into an IndicatorGrid or ScalarField.

    Raises:
        InputException: If the file does not exist
        VolumeFormatException: If the header is malformed or the payload size disagrees with it
    """
    fields, payload = _header_fields(_read_bytes(path, "Volume"))
    try:
        dims = tuple(int(v) for v in fields["dims"])
        (spacing,) = (float(v) for v in fields["spacing"])
        origin = tuple(float(v) for v in fields["origin"])
        (dtype,) = fields["dtype"]
        lattice = Lattice(dims, spacing, origin)
    except (KeyError, ValueError, GeometryException) as exc:
        raise VolumeFormatException(f"Bad volume header in {path}: {exc}")

    if dtype == "bit":
        expected = (lattice.size + 7) // 8
    elif dtype == "f64":
        expected = 8 * lattice.size
    else:
        raise VolumeFormatException(f"Unknown volume dtype '{dtype}'")
    if len(payload) != expected:
        raise VolumeFormatException(
            f"Payload of {path} holds {len(payload)} bytes, header dims {dims} need {expected}"
        )

    if dtype == "bit":
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), count=lattice.size, bitorder="little")
        return IndicatorGrid(lattice, bits.reshape(dims).astype(bool))
    return ScalarField(lattice, np.frombuffer(payload, dtype="<f8").reshape(dims))


def read_grid(path: PathLike) -> IndicatorGrid:
    """Read a volume file that must hold an indicator grid."""
    volume = read_volume(path)
    if not isinstance(volume, IndicatorGrid):
        raise VolumeFormatException(f"{path} holds a scalar field, expected an indicator grid")
    return volume


def export_vtk(path: PathLike, volume: Volume, title: Optional[str] = None) -> Path:
    """Write a legacy ASCII VTK structured-points file for third-party viewers."""
    path = Path(path)
    lattice = volume.lattice
    is_grid = isinstance(volume, IndicatorGrid)
    values = volume.cells.ravel(order="F")
    lines = [
        "# vtk DataFile Version 3.0",
        (title or path.stem)[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(n) for n in lattice.dims),
        "ORIGIN " + " ".join(repr(o) for o in lattice.origin),
        "SPACING " + " ".join([repr(lattice.spacing)] * 3),
        f"POINT_DATA {lattice.size}",
        f"SCALARS values {'unsigned_char' if is_grid else 'double'} 1",
        "LOOKUP_TABLE default",
    ]
    body = values.astype(np.uint8).astype(str) if is_grid else np.array([repr(float(v)) for v in values])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines + list(body)) + "\n", encoding="utf-8")
    return path


def write_volumes(prefix: PathLike, volumes: Sequence[Tuple[str, Volume]]) -> list:
    """Write several volumes as <prefix>_<suffix>.vox."""
    prefix = Path(prefix)
    return [write_volume(prefix.with_name(f"{prefix.name}_{suffix}.vox"), volume) for suffix, volume in volumes]
