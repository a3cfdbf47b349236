"""Providers that turn a setup file and command-line flags into domain objects."""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from pydantic import ValidationError

from app.config import settings
from app.models.lattice import IndicatorGrid, Lattice, Rotation
from app.models.machine import FixtureConfig, MachineSetup, ToolAssembly
from app.models.results import SamplingMode
from app.schemas.config import AccessibilityConfig, OptimizeConfig, PlanConfig
from app.schemas.setup import SetupConfig, ToolSpec
from app.services.machine import STANDARD_18, build_tool, orientation_set, uniform2d
from app.services.volume_io import read_grid
from app.utils.exceptions import InputException, LatticeMismatchException, UsageException

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LoadedSetup:
    """A validated setup file with its volumes loaded."""

    config: SetupConfig
    path: Path
    part: IndicatorGrid
    setup: MachineSetup


def _validation_message(exc: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
    )


def load_setup_config(path: Path) -> SetupConfig:
    """
    Parse and validate a JSON setup file.

    Raises:
        InputException: If the file is missing, not JSON, or fails validation
    """
    path = Path(path)
    if not path.is_file():
        raise InputException(f"Setup file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputException(f"{path} is not valid JSON: {exc}")
    try:
        return SetupConfig.model_validate(raw)
    except ValidationError as exc:
        raise InputException(f"Invalid setup file {path}: {_validation_message(exc)}")


def _grid(base: Path, name: str, spacing: float) -> IndicatorGrid:
    path = Path(name) if Path(name).is_absolute() else base / name
    grid = read_grid(path)
    if not math.isclose(grid.lattice.spacing, spacing, rel_tol=1e-9):
        raise LatticeMismatchException(
            f"{path} has spacing {grid.lattice.spacing} mm, the setup declares {spacing} mm"
        )
    return grid


def get_rotations(spec) -> List[Rotation]:
    """Rotation set from 'standard18', 'uniform2d:<n>' or an axis-angle list."""
    if isinstance(spec, str):
        if spec == "standard18":
            return orientation_set(STANDARD_18)
        return uniform2d(int(spec.split(":", 1)[1]))
    return [Rotation.from_axis_angle(r.axis, math.radians(r.angle_deg)) for r in spec]


def get_tool(spec: ToolSpec, base: Path, spacing: float) -> ToolAssembly:
    holder = _grid(base, spec.holder, spacing)
    cutter = _grid(base, spec.cutter, spacing)
    explicit = spec.sharp_points if isinstance(spec.sharp_points, list) else None
    count = spec.sharp_points if isinstance(spec.sharp_points, int) else settings.DEFAULT_N_SHARP_POINTS
    return build_tool(
        holder,
        cutter,
        get_rotations(spec.rotations),
        name=spec.name,
        sharp_points=explicit,
        n_sharp_points=count,
    )


def get_setup(config_path: Path) -> LoadedSetup:
    """
    Load the part, fixtures and tools a setup file names.

    Relative paths resolve against the setup file's directory. A setup without
    fixtures gets a single empty fixturing configuration.
    """
    config_path = Path(config_path)
    config = load_setup_config(config_path)
    base = config_path.resolve().parent
    spacing = config.spacing

    part = _grid(base, config.part, spacing)
    fixtures = [
        FixtureConfig(
            body=_grid(base, f.path, spacing) if f.path else IndicatorGrid.empty(Lattice((1, 1, 1), spacing)),
            name=f.name,
        )
        for f in config.fixtures
    ] or [FixtureConfig(body=IndicatorGrid.empty(Lattice((1, 1, 1), spacing)), name="none")]
    tools = [get_tool(t, base, spacing) for t in config.tools]

    setup = MachineSetup(
        fixtures=tuple(fixtures),
        tools=tuple(tools),
        platform_thickness=config.platform_thickness or settings.PLATFORM_THICKNESS,
        platform_margin=config.platform_margin if config.platform_margin is not None else settings.PLATFORM_MARGIN,
    )
    logger.info("Loaded setup %s: %d fixtures, %d tools, part %s", config_path.name, len(fixtures), len(tools), part)
    return LoadedSetup(config=config, path=config_path, part=part, setup=setup)


def _merge(*layers: dict) -> dict:
    """Later layers win; None values never override."""
    merged = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    return merged


def get_optimize_config(config: SetupConfig, planar: bool = False, **overrides) -> OptimizeConfig:
    """
    OptimizeConfig from CLI flags over setup-file values over settings.

    Planar parts sample the in-plane circle unless a mode is given.
    """
    default_mode = SamplingMode.CIRCLE_UNIFORM if planar else SamplingMode.SPHERE_FIBONACCI
    from_file = {
        "lam": config.lam,
        "alpha_deg": config.alpha_deg,
        "w_acc": config.w_acc,
        "n_b": config.sampling.n_b,
        "n_b_star": config.sampling.n_b_star,
        "mode": config.sampling.mode or default_mode,
        "roll_deg": config.roll_deg,
        "v_s_max": config.v_s_max,
        "v_gamma_max": config.v_gamma_max,
    }
    try:
        return OptimizeConfig(**_merge(from_file, overrides))
    except ValidationError as exc:
        raise UsageException(_validation_message(exc))


def get_plan_config(config: SetupConfig, **overrides) -> PlanConfig:
    """PlanConfig from CLI flags over setup-file values over settings."""
    from_file = {
        "lam": config.lam,
        "alpha_deg": config.alpha_deg,
        "roll_deg": config.roll_deg,
        "halt_fraction": config.halt_fraction,
    }
    try:
        return PlanConfig(**_merge(from_file, overrides))
    except ValidationError as exc:
        raise UsageException(_validation_message(exc))


def parse_direction(text: str) -> Tuple[float, float, float]:
    """Unit vector from 'x,y,z' (or 'x,y' for planar parts); the input is normalized."""
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageException(f"Build direction must be comma-separated numbers, got '{text}'")
    if len(values) == 2:
        values.append(0.0)
    b = np.asarray(values)
    norm = float(np.linalg.norm(b)) if len(values) == 3 else 0.0
    if not math.isfinite(norm) or norm == 0.0:
        raise UsageException(f"Build direction must be a non-zero 2- or 3-vector, got '{text}'")
    return tuple(float(v) for v in b / norm)


def get_accessibility_config(config: SetupConfig, **overrides) -> AccessibilityConfig:
    """lambda, alpha and roll from CLI flags over setup-file values over settings."""
    from_file = {"lam": config.lam, "alpha_deg": config.alpha_deg, "roll_deg": config.roll_deg}
    try:
        return AccessibilityConfig(**_merge(from_file, overrides))
    except ValidationError as exc:
        raise UsageException(_validation_message(exc))
