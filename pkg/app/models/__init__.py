"""Domain types for voxel geometry, machining setups and analysis results."""
from app.models.lattice import (
    BooleanOp,
    ThresholdMode,
    Lattice,
    IndicatorGrid,
    ScalarField,
    Rotation,
    bounding_lattice,
)
from app.models.mesh import TriangleMesh
from app.models.machine import ToolAssembly, FixtureConfig, MachineSetup
from app.models.results import (
    NearNetShape,
    ArgminMeta,
    ImfResult,
    SamplingMode,
    OrientationRecord,
    PlanStep,
    SupportRemovalPlan,
)

__all__ = [
    # Lattice types
    "BooleanOp",
    "ThresholdMode",
    "Lattice",
    "IndicatorGrid",
    "ScalarField",
    "Rotation",
    "bounding_lattice",
    # Geometry input
    "TriangleMesh",
    # Machining setup
    "ToolAssembly",
    "FixtureConfig",
    "MachineSetup",
    # Results
    "NearNetShape",
    "ArgminMeta",
    "ImfResult",
    "SamplingMode",
    "OrientationRecord",
    "PlanStep",
    "SupportRemovalPlan",
]
