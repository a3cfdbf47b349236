"""Setup file schemas: part, platform, fixtures, tools and run parameters."""
import re
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.results import SamplingMode

ROTATION_PRESET = re.compile(r"^(standard18|uniform2d:[1-9][0-9]*)$")


class RotationSpec(BaseModel):
    """One allowed tool rotation as an axis and an angle."""

    axis: Tuple[float, float, float]
    angle_deg: float

    @field_validator("axis")
    @classmethod
    def check_axis(cls, v):
        if all(c == 0 for c in v):
            raise ValueError("rotation axis must be non-zero")
        return v


class ToolSpec(BaseModel):
    """Tool assembly given as holder and cutter volume files."""

    name: str = Field(..., min_length=1, max_length=100)
    holder: str
    cutter: str
    # count for the default rule, or explicit cutter cell indices
    sharp_points: Optional[Union[int, List[Tuple[int, int, int]]]] = None
    rotations: Union[str, List[RotationSpec]] = "uniform2d:1"

    @field_validator("sharp_points")
    @classmethod
    def check_sharp_points(cls, v):
        if isinstance(v, int) and v < 1:
            raise ValueError("sharp point count must be at least 1")
        if isinstance(v, list) and not v:
            raise ValueError("explicit sharp point list must not be empty")
        return v

    @field_validator("rotations")
    @classmethod
    def check_rotations(cls, v):
        if isinstance(v, str) and not ROTATION_PRESET.match(v):
            raise ValueError(f"unknown rotation set '{v}' (use 'standard18' or 'uniform2d:<n>')")
        if isinstance(v, list) and not v:
            raise ValueError("rotation list must not be empty")
        return v


class FixtureSpec(BaseModel):
    """Fixturing configuration given as a volume file in the working frame."""

    name: str = Field(..., min_length=1, max_length=100)
    path: Optional[str] = None


class SamplingSpec(BaseModel):
    """Build-direction sampling."""

    # unset: circle_uniform for planar parts, sphere_fibonacci otherwise
    mode: Optional[SamplingMode] = None
    n_b: Optional[int] = Field(None, ge=1)
    n_b_star: Optional[int] = Field(None, ge=1)


class SetupConfig(BaseModel):
    """Schema for a setup file; unset run parameters fall back to settings."""

    spacing: float = Field(..., gt=0)
    part: str
    platform_thickness: Optional[int] = Field(None, ge=1)
    platform_margin: Optional[int] = Field(None, ge=0)
    fixtures: List[FixtureSpec] = Field(default_factory=list)
    tools: List[ToolSpec] = Field(..., min_length=1)

    alpha_deg: Optional[float] = Field(None, gt=0, le=90)
    lam: Optional[float] = Field(None, ge=0, alias="lambda")
    w_acc: Optional[float] = Field(None, ge=0, le=1)
    sampling: SamplingSpec = Field(default_factory=SamplingSpec)
    halt_fraction: Optional[float] = Field(None, gt=0, le=1)
    roll_deg: float = 0.0
    v_s_max: Optional[float] = Field(None, gt=0)
    v_gamma_max: Optional[float] = Field(None, gt=0)

    model_config = ConfigDict(populate_by_name=True)
