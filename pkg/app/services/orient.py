"""Build-direction sampling and weighted ranking of support and secluded support volumes."""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from app.models.lattice import IndicatorGrid
from app.models.machine import MachineSetup
from app.models.results import OrientationRecord, SamplingMode
from app.schemas.config import OptimizeConfig
from app.services.imf import imf_setup, split_support
from app.services.support import assemble_near_net
from app.utils.exceptions import UsageException
from app.utils.parallel import parallel_map, resolve_workers

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1.0 + 5.0 ** 0.5) / 2.0


def sample_directions(n: int, mode: SamplingMode = SamplingMode.SPHERE_FIBONACCI) -> np.ndarray:
    """
    Unit build directions.

    Args:
        n: Number of directions
        mode: sphere_fibonacci for near-uniform points on the sphere, circle_uniform
            for the planar set R(2*pi*i/n) applied to (0, 1, 0)

    Returns:
        (n, 3) array of unit vectors
    """
    if n < 1:
        raise UsageException(f"Sample count must be at least 1, got {n}")
    i = np.arange(n)
    if SamplingMode(mode) is SamplingMode.CIRCLE_UNIFORM:
        theta = 2.0 * np.pi * i / n
        points = np.stack([-np.sin(theta), np.cos(theta), np.zeros(n)], axis=-1)
    else:
        theta = 2.0 * np.pi * i / GOLDEN_RATIO
        phi = np.arccos(1.0 - 2.0 * (i + 0.5) / n)
        points = np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=-1)
    # exact zeros for clean reports
    points[np.abs(points) < 1e-12] = 0.0
    return points


def xi(v_s: float, v_gamma: float, v_s_max: float, v_gamma_max: float, w_acc: float) -> float:
    """
    Weighted value (1 - w) V_S / V_Smax + w V_Gamma / V_Gammamax.

    A term whose maximum is zero contributes 0.
    """
    if not 0.0 <= w_acc <= 1.0:
        raise UsageException(f"w_acc must lie in [0, 1], got {w_acc}")
    support_term = v_s / v_s_max if v_s_max > 0 else 0.0
    secluded_term = v_gamma / v_gamma_max if v_gamma_max > 0 else 0.0
    return (1.0 - w_acc) * support_term + w_acc * secluded_term


def evaluate_orientation(
    part: IndicatorGrid,
    setup: MachineSetup,
    b: Sequence[float],
    cfg: OptimizeConfig,
    index: int = 0,
    workers: Optional[int] = None,
) -> OrientationRecord:
    """Support volume and secluded support volume at one build direction."""
    b = np.asarray(b, dtype=np.float64)
    if not math.isclose(float(np.linalg.norm(b)), 1.0, abs_tol=1e-6):
        raise UsageException(f"Build direction must be a unit vector, got {b.tolist()}")
    near_net = assemble_near_net(part, b, cfg.alpha_deg, roll_deg=cfg.roll_deg)
    if near_net.support.is_empty:
        return OrientationRecord(index=index, b=tuple(float(v) for v in b), v_s=0.0, v_gamma=0.0)

    field = imf_setup(near_net.part, setup, workers=workers).field
    _, secluded = split_support(near_net.support, field, cfg.lam)
    return OrientationRecord(
        index=index,
        b=tuple(float(v) for v in b),
        v_s=near_net.support.volume,
        v_gamma=secluded.volume,
    )


def rank_records(records: Sequence[OrientationRecord], cfg: OptimizeConfig) -> List[OrientationRecord]:
    """
    Attach xi to every record and sort ascending.

    Maxima come from cfg when fixed there, otherwise from the records themselves.
    Ties are broken by smaller V_Gamma, then smaller V_S, then sample index.
    """
    v_s_max = cfg.v_s_max if cfg.v_s_max is not None else max((r.v_s for r in records), default=0.0)
    v_gamma_max = cfg.v_gamma_max if cfg.v_gamma_max is not None else max((r.v_gamma for r in records), default=0.0)
    scored = [
        OrientationRecord(
            index=r.index,
            b=r.b,
            v_s=r.v_s,
            v_gamma=r.v_gamma,
            xi=xi(r.v_s, r.v_gamma, v_s_max, v_gamma_max, cfg.w_acc),
        )
        for r in records
    ]
    return sorted(scored, key=lambda r: (r.xi, r.v_gamma, r.v_s, r.index))


def score_orientations(
    part: IndicatorGrid,
    setup: MachineSetup,
    cfg: OptimizeConfig,
    workers: Optional[int] = None,
) -> List[OrientationRecord]:
    """Evaluate and rank all n_b sampled build directions."""
    directions = sample_directions(cfg.n_b, cfg.mode)
    workers = resolve_workers(workers)

    # nested parallel levels run serially
    def run(item):
        index, b = item
        return evaluate_orientation(part, setup, b, cfg, index=index, workers=1)

    records = parallel_map(run, list(enumerate(directions)), workers)
    logger.info("Evaluated %d build directions", len(records))
    return rank_records(records, cfg)


def optimize(
    part: IndicatorGrid,
    setup: MachineSetup,
    cfg: OptimizeConfig,
    workers: Optional[int] = None,
) -> List[OrientationRecord]:
    """The n_b_star best build directions by xi."""
    return score_orientations(part, setup, cfg, workers=workers)[:cfg.n_b_star]
