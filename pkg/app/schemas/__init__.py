"""Pydantic schemas for setup files, run configurations and report rows."""
from app.schemas.config import AccessibilityConfig, OptimizeConfig, PlanConfig
from app.schemas.setup import (
    RotationSpec,
    ToolSpec,
    FixtureSpec,
    SamplingSpec,
    SetupConfig,
)
from app.schemas.report import OrientationRow, PlanRow, format_direction

__all__ = [
    # Run configurations
    "AccessibilityConfig",
    "OptimizeConfig",
    "PlanConfig",
    # Setup file
    "RotationSpec",
    "ToolSpec",
    "FixtureSpec",
    "SamplingSpec",
    "SetupConfig",
    # Reports
    "OrientationRow",
    "PlanRow",
    "format_direction",
]
