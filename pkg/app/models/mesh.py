"""Triangle soup read from STL files."""
from dataclasses import dataclass

import numpy as np

from app.utils.exceptions import GeometryException


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangles as an (n, 3, 3) array of vertex positions in mm."""

    triangles: np.ndarray
    name: str = ""

    def __post_init__(self):
        tris = np.array(self.triangles, dtype=np.float64, copy=True)
        if tris.ndim != 3 or tris.shape[1:] != (3, 3):
            raise GeometryException(f"Triangles must have shape (n, 3, 3), got {tris.shape}")
        tris.setflags(write=False)
        object.__setattr__(self, "triangles", tris)

    def __len__(self) -> int:
        return self.triangles.shape[0]

    @property
    def bounds(self):
        """(min corner, max corner)."""
        flat = self.triangles.reshape(-1, 3)
        return flat.min(axis=0), flat.max(axis=0)

    def __repr__(self):
        return f"<TriangleMesh {self.name or '?'}: {len(self)} triangles>"
