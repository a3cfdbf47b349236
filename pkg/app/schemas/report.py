"""Report row schemas for the ranking and plan tables."""
from typing import ClassVar, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from app.models.results import OrientationRecord, PlanStep


def format_direction(direction: Optional[Tuple[float, float, float]]) -> str:
    """Approach direction as (x,y,z) with trailing zeros dropped."""
    if direction is None:
        return "-"
    return "(" + ",".join(f"{v:g}" for v in direction) + ")"


class OrientationRow(BaseModel):
    """One row of the orientation ranking table."""

    model_config = ConfigDict(frozen=True)

    rank: int
    bx: float
    by: float
    bz: float
    V_S_mm3: float
    V_Gamma_mm3: float
    xi: float

    CSV_FIELDS: ClassVar[List[str]] = ["bx", "by", "bz", "V_S_mm3", "V_Gamma_mm3", "xi"]

    @classmethod
    def from_record(cls, rank: int, record: OrientationRecord) -> "OrientationRow":
        bx, by, bz = record.b
        return cls(
            rank=rank,
            bx=bx,
            by=by,
            bz=bz,
            V_S_mm3=record.v_s,
            V_Gamma_mm3=record.v_gamma,
            xi=record.xi if record.xi is not None else 0.0,
        )

    def csv_row(self) -> Dict[str, str]:
        return {
            "bx": f"{self.bx:.6f}",
            "by": f"{self.by:.6f}",
            "bz": f"{self.bz:.6f}",
            "V_S_mm3": f"{self.V_S_mm3:.4f}",
            "V_Gamma_mm3": f"{self.V_Gamma_mm3:.4f}",
            "xi": f"{self.xi:.6f}",
        }


class PlanRow(BaseModel):
    """One row of the support removal plan."""

    model_config = ConfigDict(frozen=True)

    step: int
    volume_fraction_pct: float
    fixture: str
    tool: str
    direction: str

    CSV_FIELDS: ClassVar[List[str]] = ["step", "volume_fraction_pct", "fixture", "tool", "direction"]

    @classmethod
    def from_step(cls, step: PlanStep) -> "PlanRow":
        return cls(
            step=step.step_index,
            volume_fraction_pct=100.0 * step.removed_fraction,
            fixture=step.fixture or "-",
            tool=step.tool or "-",
            direction=format_direction(step.direction),
        )

    def csv_row(self) -> Dict[str, str]:
        return {
            "step": str(self.step),
            "volume_fraction_pct": f"{self.volume_fraction_pct:.2f}",
            "fixture": self.fixture,
            "tool": self.tool,
            "direction": self.direction,
        }
