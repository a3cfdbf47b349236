"""Result types produced by the support, IMF, orientation and planning services."""
import enum
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from app.models.lattice import IndicatorGrid, Rotation, ScalarField


@dataclass(frozen=True, eq=False)
class NearNetShape:
    """Part rotated so the build direction points along the build axis, plus its supports."""

    part: IndicatorGrid
    support: IndicatorGrid
    build_dir: Tuple[float, float, float]
    rotation: Rotation

    @property
    def support_volume(self) -> float:
        return self.support.volume

    @property
    def combined(self) -> IndicatorGrid:
        return IndicatorGrid(self.part.lattice, self.part.cells | self.support.cells)


@dataclass(frozen=True, eq=False)
class ArgminMeta:
    """Per-cell indices (fixture, tool, rotation, sharp point) achieving the field minimum."""

    fixture: np.ndarray
    tool: np.ndarray
    rotation: np.ndarray
    sharp_point: np.ndarray

    def at(self, idx) -> Tuple[int, int, int, int]:
        idx = tuple(idx)
        return (
            int(self.fixture[idx]),
            int(self.tool[idx]),
            int(self.rotation[idx]),
            int(self.sharp_point[idx]),
        )


@dataclass(frozen=True, eq=False)
class ImfResult:
    """Combined inaccessibility field with optional per-fixture fields and argmin metadata."""

    field: ScalarField
    per_fixture: Optional[List[ScalarField]] = None
    argmin: Optional[ArgminMeta] = None


class SamplingMode(str, enum.Enum):
    """Build-direction sampler."""
    SPHERE_FIBONACCI = "sphere_fibonacci"
    CIRCLE_UNIFORM = "circle_uniform"


@dataclass(frozen=True)
class OrientationRecord:
    """Support and secluded support volume at one sampled build direction."""

    index: int
    b: Tuple[float, float, float]
    v_s: float
    v_gamma: float
    xi: Optional[float] = None


@dataclass(frozen=True, eq=False)
class PlanStep:
    """One (fixture, tool, rotation) removal action."""

    step_index: int
    fixture_index: Optional[int]
    fixture: Optional[str]
    tool_index: Optional[int]
    tool: Optional[str]
    rotation_index: Optional[int]
    rotation: Optional[Rotation]
    direction: Optional[Tuple[float, float, float]]
    removed: IndicatorGrid
    removed_fraction: float

    @property
    def is_sentinel(self) -> bool:
        return self.removed_fraction == 0.0

    @property
    def removed_volume(self) -> float:
        return self.removed.volume


@dataclass(frozen=True, eq=False)
class SupportRemovalPlan:
    """Ordered removal steps and the support left when planning halted."""

    near_net: NearNetShape
    steps: List[PlanStep]
    remaining: IndicatorGrid
    initial_volume: float
    accessible_remaining_volume: float

    @property
    def removed_fraction(self) -> float:
        return sum(step.removed_fraction for step in self.steps)
