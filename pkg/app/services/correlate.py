"""
FFT-based correlation of indicator grids.

correlate(obstacle, tool) evaluates the convolution 1_O * tool. Callers pass the
reflected tool, so the value at t is the overlap volume between the obstacle and
the unreflected tool translated so its registration origin sits at world point t.
The output lattice covers every translation with a possibly non-zero overlap
(full linear convolution, no wraparound).
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from app.models.lattice import IndicatorGrid, Lattice, ScalarField
from app.services.grid import reflect
from app.utils.exceptions import GeometryException, LatticeMismatchException

logger = logging.getLogger(__name__)


def _check_inputs(obstacle: IndicatorGrid, tool: IndicatorGrid) -> None:
    if not math.isclose(obstacle.lattice.spacing, tool.lattice.spacing, rel_tol=1e-9):
        raise LatticeMismatchException(
            f"Spacing mismatch: obstacle {obstacle.lattice.spacing} mm, tool {tool.lattice.spacing} mm"
        )
    if tool.is_empty:
        raise GeometryException("Cannot correlate against an empty tool")


def output_lattice(obstacle: Lattice, tool: Lattice) -> Lattice:
    """Lattice of the full linear convolution of two grids."""
    dims = tuple(a + b - 1 for a, b in zip(obstacle.dims, tool.dims))
    origin = tuple(a + b for a, b in zip(obstacle.origin, tool.origin))
    return Lattice(dims, obstacle.spacing, origin)


def convolve_counts(a: np.ndarray, b: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    """
    Full linear convolution of two indicator arrays as raw floating-point overlap counts.

    Both arrays are zero-padded to FFT-friendly sizes of at least len(a) + len(b) - 1
    per axis and transformed with real-to-complex FFTs.
    """
    full = [na + nb - 1 for na, nb in zip(a.shape, b.shape)]
    fast = [sp_fft.next_fast_len(n, real=True) for n in full]
    fa = sp_fft.rfftn(a.astype(np.float64), s=fast, workers=workers)
    fb = sp_fft.rfftn(b.astype(np.float64), s=fast, workers=workers)
    raw = sp_fft.irfftn(fa * fb, s=fast, workers=workers)
    return raw[tuple(slice(0, n) for n in full)]


def correlate(obstacle: IndicatorGrid, tool: IndicatorGrid, workers: Optional[int] = None) -> ScalarField:
    """
    Overlap volume field of the obstacle against a reflected tool, by FFT.

    Args:
        obstacle: Stationary obstacle indicator
        tool: Rotated and reflected moving indicator
        workers: Threads handed to scipy.fft

    Returns:
        Overlap volumes (mm³) on the full convolution lattice, rounded to whole cells

    Raises:
        GeometryException: If the tool is empty
        LatticeMismatchException: If the spacings differ
    """
    _check_inputs(obstacle, tool)
    lattice = output_lattice(obstacle.lattice, tool.lattice)
    if obstacle.is_empty:
        return ScalarField(lattice, np.zeros(lattice.dims))

    raw = convolve_counts(obstacle.cells, tool.cells, workers=workers)
    counts = np.clip(np.rint(raw), 0.0, None)
    logger.debug("correlate %s x %s -> %s", obstacle.lattice.dims, tool.lattice.dims, lattice.dims)
    return ScalarField(lattice, counts * obstacle.lattice.cell_volume)


def correlate_direct(obstacle: IndicatorGrid, tool: IndicatorGrid) -> ScalarField:
    """
    Same contract as correlate, computed by direct summation over tool cells.

    Intended for small grids (up to about 32³); used as the reference for the FFT path.
    """
    _check_inputs(obstacle, tool)
    lattice = output_lattice(obstacle.lattice, tool.lattice)
    counts = np.zeros(lattice.dims, dtype=np.int64)
    nx, ny, nz = obstacle.lattice.dims
    src = obstacle.cells.astype(np.int64)
    for i, j, k in tool.set_indices():
        counts[i:i + nx, j:j + ny, k:k + nz] += src
    return ScalarField(lattice, counts * obstacle.lattice.cell_volume)


def cross_correlate(a: IndicatorGrid, b: IndicatorGrid, workers: Optional[int] = None) -> ScalarField:
    """Overlap volume of a with b translated so b's registration origin sits at t."""
    return correlate(a, reflect(b), workers=workers)
