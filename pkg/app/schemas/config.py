"""Run configuration schemas for orientation search and removal planning."""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.models.results import SamplingMode


class AccessibilityConfig(BaseModel):
    """Parameters shared by every accessibility run."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lam: float = Field(default_factory=lambda: settings.DEFAULT_LAMBDA, ge=0, alias="lambda")
    alpha_deg: float = Field(default_factory=lambda: settings.DEFAULT_ALPHA_DEG, gt=0, le=90)
    roll_deg: float = 0.0


class OptimizeConfig(AccessibilityConfig):
    """Schema for a build orientation search."""

    w_acc: float = Field(default_factory=lambda: settings.DEFAULT_W_ACC, ge=0, le=1)
    n_b: int = Field(default_factory=lambda: settings.DEFAULT_N_B, ge=1)
    n_b_star: int = Field(default_factory=lambda: settings.DEFAULT_N_B_STAR, ge=1)
    mode: SamplingMode = SamplingMode.SPHERE_FIBONACCI
    v_s_max: Optional[float] = Field(None, gt=0)
    v_gamma_max: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def check_counts(self):
        if self.n_b_star > self.n_b:
            raise ValueError(f"n_b_star ({self.n_b_star}) cannot exceed n_b ({self.n_b})")
        return self


class PlanConfig(AccessibilityConfig):
    """Schema for support removal planning."""

    halt_fraction: float = Field(default_factory=lambda: settings.DEFAULT_HALT_FRACTION, gt=0, le=1)
