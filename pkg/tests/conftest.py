"""
Shared test fixtures.

How it works:
- Geometry builders live in tests/geometry.py; fixtures here wrap the ones most
  tests share.
- `setup_files` writes a complete setup (part, tool volumes and JSON config) into
  tmp_path so CLI tests can drive main.run() exactly as a user would.
- Every test runs with WORKERS=1 unless it asks for more.
"""
import json

import numpy as np
import pytest

from app.config import settings
from app.services.volume_io import write_volume
from tests.geometry import grid, open_setup, slot_part, stick_tool


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Default to one worker so results never depend on the machine."""
    monkeypatch.setattr(settings, "WORKERS", 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def stick():
    """Planar stick tool with rotations 0 and 180 degrees about z."""
    return stick_tool()


@pytest.fixture
def slot_scene(stick):
    """The 60/40 slot part and an open setup with the stick tool."""
    return slot_part(), open_setup([stick])


def _write_tool_volumes(directory, length=64):
    holder = np.zeros((length, 1, 1), dtype=bool)
    holder[: length - 1] = True
    cutter = np.zeros((length, 1, 1), dtype=bool)
    cutter[length - 1] = True
    write_volume(directory / "holder.vox", grid(holder))
    write_volume(directory / "cutter.vox", grid(cutter))


@pytest.fixture
def setup_files(tmp_path):
    """
    Factory writing a setup file for the slot part.

    Returns a function taking the part grid, the rotation spec and extra config
    keys, and returning the config path.
    """
    _write_tool_volumes(tmp_path)

    def make(part=None, rotations="uniform2d:2", **extra):
        write_volume(tmp_path / "part.vox", part if part is not None else slot_part())
        config = {
            "spacing": 1.0,
            "part": "part.vox",
            "tools": [{
                "name": "stick",
                "holder": "holder.vox",
                "cutter": "cutter.vox",
                "sharp_points": [[63, 0, 0]],
                "rotations": rotations,
            }],
            "alpha_deg": 90,
            "lambda": 0.001,
        }
        config.update(extra)
        path = tmp_path / "setup.json"
        path.write_text(json.dumps(config), encoding="utf-8")
        return path

    return make
