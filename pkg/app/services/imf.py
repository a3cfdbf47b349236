"""
Inaccessibility measure field (IMF).

For one tool the field at x is the smallest normalized overlap between the
obstacle and the tool over every allowed rotation R and sharp point k, with the
tool placed so that R k sits on x. The multi-tool and multi-fixture fields take
further cellwise minima.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.models.lattice import (
    BooleanOp,
    IndicatorGrid,
    Lattice,
    Rotation,
    ScalarField,
    ThresholdMode,
    bounding_lattice,
)
from app.models.machine import MachineSetup, ToolAssembly
from app.models.results import ArgminMeta, ImfResult
from app.services.correlate import cross_correlate
from app.services.grid import boolean, paste, rotate, threshold, union_all
from app.services.machine import platform_for
from app.utils.exceptions import GeometryException, LatticeMismatchException
from app.utils.parallel import parallel_map, resolve_workers

logger = logging.getLogger(__name__)

# Value used where a shifted correlation field is undefined
OUT_OF_RANGE_FILL = 1.0


@dataclass(frozen=True, eq=False)
class OrientedTool:
    """Tool body rotated about its registration origin, with rotated sharp points."""

    body: IndicatorGrid
    sharp_points: np.ndarray
    rotation: Rotation

    @property
    def n_cells(self) -> int:
        return self.body.count


@dataclass(frozen=True, eq=False)
class CombinationField:
    """Field of one (fixture, tool, rotation) combination, minimized over sharp points."""

    fixture_index: int
    tool_index: int
    rotation_index: int
    values: np.ndarray
    sharp_point: np.ndarray


def orient_tool(tool: ToolAssembly, rotation: Rotation) -> OrientedTool:
    """Rotate a tool about its registration origin and map its sharp points to the nearest lattice offsets."""
    if not tool.sharp_points:
        raise GeometryException(f"Tool '{tool.name}' has no sharp points")
    body = rotate(tool.body, rotation, pivot=(0.0, 0.0, 0.0))
    if body.is_empty:
        raise GeometryException(f"Tool '{tool.name}' vanished after rotation")
    moved = rotation.apply(np.asarray(tool.sharp_points, dtype=np.float64))
    return OrientedTool(body=body, sharp_points=np.floor(moved + 0.5).astype(np.int64), rotation=rotation)


def rotation_field(
    obstacle: IndicatorGrid,
    oriented: OrientedTool,
    query: Lattice,
    fft_workers: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Normalized overlap field for one oriented tool, minimized over its sharp points.

    The correlation is evaluated on the full convolution lattice, normalized by the
    oriented tool's volume, shifted by each rotated sharp point and gathered onto
    the query lattice.

    Returns:
        (values, index of the sharp point achieving each value) on the query lattice
    """
    g = cross_correlate(obstacle, oriented.body, workers=fft_workers)
    normalized = g.cells / (oriented.n_cells * obstacle.lattice.cell_volume)
    base = np.asarray(query.cell_offset(g.lattice))

    values = np.full(query.dims, np.inf)
    arg = np.zeros(query.dims, dtype=np.int16)
    shifted = np.empty(query.dims)
    for index, k in enumerate(oriented.sharp_points):
        shifted.fill(OUT_OF_RANGE_FILL)
        paste(shifted, normalized, base + k)
        better = shifted < values
        values[better] = shifted[better]
        arg[better] = index
    return values, arg


def _check_tool(tool: ToolAssembly) -> None:
    if not tool.rotations:
        raise GeometryException(f"Tool '{tool.name}' has an empty rotation set")
    if not tool.sharp_points:
        raise GeometryException(f"Tool '{tool.name}' has no sharp points")


def _chunks(items: Sequence, size: int) -> Iterator[Sequence]:
    for start in range(0, len(items), size):
        yield items[start:start + size]


def iter_combination_fields(
    obstacles: Sequence[IndicatorGrid],
    tools: Sequence[ToolAssembly],
    query: Lattice,
    workers: Optional[int] = None,
) -> Iterator[CombinationField]:
    """
    Yield every (fixture, tool, rotation) field in lexicographic index order.

    Combinations are evaluated in parallel batches; the yield order never depends
    on the worker count.
    """
    for tool in tools:
        _check_tool(tool)
    workers = resolve_workers(workers)
    oriented = [[orient_tool(tool, rotation) for rotation in tool.rotations] for tool in tools]
    tasks = [
        (j, i, r)
        for j in range(len(obstacles))
        for i in range(len(tools))
        for r in range(len(tools[i].rotations))
    ]
    # nested parallel levels run serially
    fft_workers = 1 if workers > 1 else None

    def run(task):
        j, i, r = task
        values, arg = rotation_field(obstacles[j], oriented[i][r], query, fft_workers=fft_workers)
        return CombinationField(j, i, r, values, arg)

    for batch in _chunks(tasks, max(workers, 1) * 2):
        for result in parallel_map(run, batch, workers):
            yield result


class _MinReducer:
    """Cellwise minimum with smallest-index tie-break and optional argmin tracking."""

    def __init__(self, dims, track: bool):
        self.values = np.full(dims, np.inf)
        self.track = track
        if track:
            self.meta = [np.zeros(dims, dtype=np.int16) for _ in range(4)]

    def add(self, values: np.ndarray, ids: Tuple[int, int, int], k_arg: Optional[np.ndarray] = None) -> None:
        better = values < self.values
        self.values[better] = values[better]
        if self.track:
            for slot, value in zip(self.meta[:3], ids):
                slot[better] = value
            self.meta[3][better] = k_arg[better]

    def finish(self) -> np.ndarray:
        out = self.values.copy()
        out[np.isinf(out)] = 0.0
        return out


def imf_single_tool(
    obstacle: IndicatorGrid,
    tool: ToolAssembly,
    workers: Optional[int] = None,
) -> ScalarField:
    """
    Field of one tool against an obstacle, on the obstacle's lattice.

    Each rotation's overlap is divided by that rotated tool's own volume
    (cell count times cell volume), not the unrotated tool volume, since
    nearest-neighbor rotation can change the cell count. Values stay in [0, 1].
    """
    return imf_tools(obstacle, [tool], workers=workers)


def imf_tools(
    obstacle: IndicatorGrid,
    tools: Sequence[ToolAssembly],
    workers: Optional[int] = None,
) -> ScalarField:
    """Cellwise minimum of the single-tool fields over several tools."""
    if not tools:
        raise GeometryException("At least one tool is required")
    reducer = _MinReducer(obstacle.lattice.dims, track=False)
    for combo in iter_combination_fields([obstacle], tools, obstacle.lattice, workers=workers):
        reducer.add(combo.values, (0, combo.tool_index, combo.rotation_index))
    return ScalarField(obstacle.lattice, reducer.finish())


def working_domain(part: IndicatorGrid, setup: MachineSetup) -> Tuple[Lattice, IndicatorGrid]:
    """Lattice covering the part, platform and every fixture, plus the platform grid."""
    platform = platform_for(setup, part.lattice)
    lattices = [part.lattice, platform.lattice] + [f.body.lattice for f in setup.fixtures]
    return bounding_lattice(lattices), platform


def fixture_obstacles(part: IndicatorGrid, setup: MachineSetup) -> List[IndicatorGrid]:
    """Obstacle part ∪ fixture ∪ platform for every fixturing configuration."""
    domain, platform = working_domain(part, setup)
    return [union_all([part, fixture.body, platform], domain) for fixture in setup.fixtures]


def imf_setup(
    part: IndicatorGrid,
    setup: MachineSetup,
    keep_per_fixture: bool = False,
    keep_argmin: bool = False,
    workers: Optional[int] = None,
) -> ImfResult:
    """
    Combined field over every fixture, tool, rotation and sharp point.

    The field is evaluated over the working domain and reported on the part's
    (near-net) lattice.

    Args:
        part: Oriented part in the working frame
        setup: Machining setup
        keep_per_fixture: Also return the field of each fixture
        keep_argmin: Also return the (fixture, tool, rotation, sharp point) minimizers

    Returns:
        ImfResult on the part's lattice
    """
    query = part.lattice
    obstacles = fixture_obstacles(part, setup)
    overall = _MinReducer(query.dims, track=keep_argmin)
    per_fixture = [_MinReducer(query.dims, track=False) for _ in obstacles] if keep_per_fixture else None

    for combo in iter_combination_fields(obstacles, setup.tools, query, workers=workers):
        ids = (combo.fixture_index, combo.tool_index, combo.rotation_index)
        overall.add(combo.values, ids, combo.sharp_point)
        if per_fixture is not None:
            per_fixture[combo.fixture_index].add(combo.values, ids)

    field = ScalarField(query, overall.finish())
    argmin = ArgminMeta(*overall.meta) if keep_argmin else None
    fixtures = [ScalarField(query, r.finish()) for r in per_fixture] if per_fixture is not None else None
    logger.debug("IMF over %d fixtures x %d tools on %s", len(obstacles), len(setup.tools), query.dims)
    return ImfResult(field=field, per_fixture=fixtures, argmin=argmin)


def imf_oracle(
    obstacle: IndicatorGrid,
    tool: ToolAssembly,
    queries: Sequence[Sequence[int]],
) -> List[float]:
    """
    Brute-force field values at query cells of the obstacle lattice.

    Every (rotation, sharp point) placement is built explicitly and its overlap with
    the obstacle counted cell by cell.
    """
    _check_tool(tool)
    dims = np.asarray(obstacle.lattice.dims)
    placements = []
    for rotation in tool.rotations:
        oriented = orient_tool(tool, rotation)
        origin_cells = np.floor(oriented.body.lattice.origin_cells + 0.5).astype(np.int64)
        cells = oriented.body.set_indices() + origin_cells
        placements.append((cells, oriented.sharp_points, oriented.n_cells))

    results = []
    for q in queries:
        q = np.asarray(q, dtype=np.int64)
        best = np.inf
        for cells, sharp_points, n_cells in placements:
            for k in sharp_points:
                pos = cells + (q - k)
                inside = np.all((pos >= 0) & (pos < dims), axis=1)
                hits = np.count_nonzero(obstacle.cells[tuple(pos[inside].T)]) if inside.any() else 0
                best = min(best, hits / n_cells)
        results.append(float(best))
    return results


def max_oracle_error(
    obstacle: IndicatorGrid,
    tool: ToolAssembly,
    n_queries: int,
    seed: int = 0,
    workers: Optional[int] = None,
) -> float:
    """Largest |FFT field - oracle| over randomly drawn query cells."""
    field = imf_single_tool(obstacle, tool, workers=workers)
    rng = np.random.default_rng(seed)
    queries = np.stack([rng.integers(0, n, size=n_queries) for n in obstacle.lattice.dims], axis=1)
    expected = imf_oracle(obstacle, tool, queries)
    actual = field.cells[tuple(queries.T)]
    return float(np.max(np.abs(actual - np.asarray(expected)))) if len(expected) else 0.0


def split_support(
    support: IndicatorGrid,
    field: ScalarField,
    lam: float,
) -> Tuple[IndicatorGrid, IndicatorGrid]:
    """
    Partition support into accessible (field <= lam) and secluded (field > lam) cells.

    Returns:
        (accessible, secluded)
    """
    if not support.lattice.same_as(field.lattice):
        raise LatticeMismatchException("Support and field must share a lattice")
    secluded = boolean(support, threshold(field, lam, ThresholdMode.GREATER), BooleanOp.INTERSECT)
    accessible = boolean(support, threshold(field, lam, ThresholdMode.LEQ), BooleanOp.INTERSECT)
    return accessible, secluded
