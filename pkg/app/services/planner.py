"""Greedy support removal planning."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.models.lattice import BooleanOp, IndicatorGrid
from app.models.machine import MachineSetup
from app.models.results import PlanStep, SupportRemovalPlan
from app.schemas.config import PlanConfig
from app.services.grid import boolean
from app.services.imf import fixture_obstacles, iter_combination_fields
from app.services.machine import approach_direction
from app.services.support import assemble_near_net

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AccessibilityMasks:
    """Cells with field <= lambda for every (fixture, tool, rotation) combination, in index order."""

    combinations: Tuple[Tuple[int, int, int], ...]
    masks: Tuple[np.ndarray, ...]

    @property
    def combined(self) -> np.ndarray:
        """Cells accessible to at least one combination."""
        out = np.zeros_like(self.masks[0])
        for mask in self.masks:
            out |= mask
        return out


def accessibility_masks(
    part: IndicatorGrid,
    setup: MachineSetup,
    lam: float,
    workers: Optional[int] = None,
) -> AccessibilityMasks:
    """
    Per-combination accessible sets on the part's lattice.

    The obstacle of each fixture never changes while planning, so these are
    computed once and intersected with the shrinking support afterwards.
    """
    obstacles = fixture_obstacles(part, setup)
    combinations = []
    masks = []
    for combo in iter_combination_fields(obstacles, setup.tools, part.lattice, workers=workers):
        combinations.append((combo.fixture_index, combo.tool_index, combo.rotation_index))
        masks.append(combo.values <= lam)
    return AccessibilityMasks(tuple(combinations), tuple(masks))


def _sentinel(support: IndicatorGrid, step_index: int) -> PlanStep:
    return PlanStep(
        step_index=step_index,
        fixture_index=None,
        fixture=None,
        tool_index=None,
        tool=None,
        rotation_index=None,
        rotation=None,
        direction=None,
        removed=IndicatorGrid.empty(support.lattice),
        removed_fraction=0.0,
    )


def max_removable(
    part: IndicatorGrid,
    support_remaining: IndicatorGrid,
    setup: MachineSetup,
    cfg: PlanConfig,
    step_index: int = 1,
    initial_count: Optional[int] = None,
    masks: Optional[AccessibilityMasks] = None,
    workers: Optional[int] = None,
) -> PlanStep:
    """
    The (fixture, tool, rotation) combination reaching the most remaining support.

    Args:
        part: Oriented part on the near-net lattice
        support_remaining: Support not yet removed, on the part's lattice
        setup: Machining setup
        cfg: Planning thresholds
        step_index: 1-based index recorded on the step
        initial_count: Initial support cell count for the removed fraction
            (defaults to the remaining count)
        masks: Precomputed accessibility masks

    Returns:
        The best step; ties go to the smallest (fixture, tool, rotation) index.
        A sentinel step with removed_fraction 0 when nothing is reachable.
    """
    if support_remaining.is_empty:
        return _sentinel(support_remaining, step_index)
    if masks is None:
        masks = accessibility_masks(part, setup, cfg.lam, workers=workers)
    initial_count = initial_count or support_remaining.count

    best_count = 0
    best = None
    for ids, mask in zip(masks.combinations, masks.masks):
        count = int(np.count_nonzero(support_remaining.cells & mask))
        if count > best_count:
            best_count, best = count, (ids, mask)

    if best is None:
        return _sentinel(support_remaining, step_index)

    (j, i, r), mask = best
    tool = setup.tools[i]
    rotation = tool.rotations[r]
    return PlanStep(
        step_index=step_index,
        fixture_index=j,
        fixture=setup.fixtures[j].name,
        tool_index=i,
        tool=tool.name,
        rotation_index=r,
        rotation=rotation,
        direction=approach_direction(tool, rotation),
        removed=IndicatorGrid(support_remaining.lattice, support_remaining.cells & mask),
        removed_fraction=best_count / initial_count,
    )


def plan(
    part: IndicatorGrid,
    b: Sequence[float],
    setup: MachineSetup,
    alpha_deg: float = settings.DEFAULT_ALPHA_DEG,
    cfg: Optional[PlanConfig] = None,
    workers: Optional[int] = None,
) -> SupportRemovalPlan:
    """
    Assemble the near-net shape at b (rolled by cfg.roll_deg) and remove its support greedily.

    Each step takes the combination with the largest accessible remaining support.
    Planning halts when the best step would remove less than halt_fraction of the
    initial support volume, or when no support is reachable.
    """
    cfg = cfg or PlanConfig()
    near_net = assemble_near_net(part, b, alpha_deg, roll_deg=cfg.roll_deg)
    support = near_net.support
    initial_count = support.count
    if initial_count == 0:
        logger.info("No support at b=%s; nothing to plan", near_net.build_dir)
        return SupportRemovalPlan(near_net, [], support, 0.0, 0.0)

    masks = accessibility_masks(near_net.part, setup, cfg.lam, workers=workers)
    halt_count = cfg.halt_fraction * initial_count
    remaining = support
    steps: List[PlanStep] = []
    while not remaining.is_empty:
        step = max_removable(
            near_net.part, remaining, setup, cfg,
            step_index=len(steps) + 1,
            initial_count=initial_count,
            masks=masks,
        )
        if step.is_sentinel or step.removed.count < halt_count:
            break
        steps.append(step)
        remaining = boolean(remaining, step.removed, BooleanOp.SUBTRACT)
        logger.info(
            "Step %d: %.2f%% with %s/%s direction %s",
            step.step_index, 100.0 * step.removed_fraction, step.fixture, step.tool, step.direction,
        )

    left_accessible = np.count_nonzero(remaining.cells & masks.combined) * support.lattice.cell_volume
    if left_accessible > 0:
        logger.warning("Halted with %.3f mm³ of accessible support left", left_accessible)
    return SupportRemovalPlan(
        near_net=near_net,
        steps=steps,
        remaining=remaining,
        initial_volume=support.volume,
        accessible_remaining_volume=float(left_accessible),
    )
