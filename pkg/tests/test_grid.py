"""Tests for lattice types and grid operations."""
import math

import numpy as np
import pytest

from app.models.lattice import BooleanOp, IndicatorGrid, Lattice, Rotation, ScalarField, ThresholdMode, bounding_lattice
from app.services.grid import (
    bbox_centroid,
    boolean,
    crop,
    embed,
    reflect,
    rotate,
    threshold,
    union_all,
    volume,
)
from app.utils.exceptions import GeometryException, LatticeMismatchException, UsageException
from tests.geometry import grid, planar, random_grid


# ── lattice ──────────────────────────────────────────────────────────────────

def test_lattice_rejects_bad_dims_and_spacing():
    with pytest.raises(GeometryException):
        Lattice((0, 1, 1), 1.0)
    with pytest.raises(GeometryException):
        Lattice((1, 1, 1), -0.5)


def test_cell_offset_requires_whole_cells():
    a = Lattice((4, 4, 4), 0.5, (0.0, 0.0, 0.0))
    assert a.cell_offset(Lattice((2, 2, 2), 0.5, (1.0, -0.5, 0.0))) == (2, -1, 0)
    with pytest.raises(LatticeMismatchException):
        a.cell_offset(Lattice((2, 2, 2), 0.5, (0.2, 0.0, 0.0)))
    with pytest.raises(LatticeMismatchException):
        a.cell_offset(Lattice((2, 2, 2), 1.0))


def test_bounding_lattice_covers_all():
    a = Lattice((4, 4, 1), 1.0, (0.0, 0.0, 0.0))
    b = Lattice((2, 2, 1), 1.0, (-3.0, 5.0, 0.0))
    box = bounding_lattice([a, b])
    assert box.origin == (-3.0, 0.0, 0.0)
    assert box.dims == (7, 7, 1)


def test_planar_build_axis():
    assert Lattice((5, 5, 1), 1.0).build_axis == 1
    assert Lattice((5, 5, 5), 1.0).build_axis == 2


def test_grid_cells_are_read_only():
    g = grid(np.ones((2, 2, 2)))
    with pytest.raises(ValueError):
        g.cells[0, 0, 0] = False


def test_scalar_field_rejects_non_finite():
    with pytest.raises(GeometryException):
        ScalarField(Lattice((1, 1, 1), 1.0), np.array([[[np.nan]]]))


# ── volume, embed, crop ──────────────────────────────────────────────────────

def test_volume_scales_with_spacing():
    g = grid(np.ones((2, 3, 4)), spacing=0.5)
    assert volume(g) == pytest.approx(24 * 0.125)


def test_embed_and_crop_round_trip(rng):
    g = random_grid(rng, (5, 6, 7), 0.3, origin=(2.0, -1.0, 3.0))
    big = embed(g, g.lattice.resized((-3, -3, -3), (11, 12, 13)))
    assert big.count == g.count
    assert crop(big).count == g.count
    assert np.array_equal(crop(big).cells, crop(g).cells)
    assert crop(big).lattice.same_as(crop(g).lattice)


# ── rotate, reflect ──────────────────────────────────────────────────────────

def test_rotate_identity_keeps_cells(rng):
    g = random_grid(rng, (6, 5, 4), 0.4)
    out = rotate(g, Rotation.identity())
    assert out.lattice.same_as(g.lattice)
    assert np.array_equal(out.cells, g.cells)


def test_rotate_quarter_turn_is_exact():
    rows = np.zeros((4, 2), dtype=bool)
    rows[:, 0] = True
    rows[0, 1] = True
    g = grid(planar(rows))
    out = rotate(g, Rotation.about_z(math.pi / 2), pivot=(0.0, 0.0, 0.0))
    assert out.count == g.count
    assert out.lattice.is_co_registered(g.lattice)
    # (x, y) -> (-y, x)
    offset = np.asarray(g.lattice.cell_offset(out.lattice))
    world = {tuple(idx + offset) for idx in out.set_indices()}
    assert world == {(-y, x, 0) for x, y, _ in g.set_indices()}


def test_rotate_about_bbox_centroid_by_default():
    g = grid(np.ones((3, 3, 3)), origin=(10.0, 10.0, 10.0))
    out = rotate(g, Rotation.from_axis_angle((0, 0, 1), math.pi))
    assert crop(out).lattice.same_as(g.lattice)


def test_rotate_box_quarter_turn_about_centroid():
    g = grid(np.ones((10, 4, 4)))
    out = rotate(g, Rotation.from_axis_angle((0, 0, 1), math.pi / 2))
    assert out.lattice.dims == (4, 10, 4)
    assert out.count == 160
    assert out.volume == g.volume
    assert np.allclose(bbox_centroid(out.lattice), bbox_centroid(g.lattice))


def _cube_cells_after_turn(n: int, angle: float) -> np.ndarray:
    """Point-in-rotated-cube test at every output cell center of a turn about z."""
    lattice = rotate(grid(np.ones((n, n, n))), Rotation.from_axis_angle((0, 0, 1), angle)).lattice
    c = (n - 1) / 2.0
    x, y, z = np.meshgrid(*(lattice.centers(a) - c for a in range(3)), indexing="ij")
    u = math.cos(angle) * x + math.sin(angle) * y
    v = -math.sin(angle) * x + math.cos(angle) * y
    half = n / 2.0
    return (np.abs(u) < half) & (np.abs(v) < half) & (np.abs(z) < half)


@pytest.mark.parametrize("n, expected", [(8, 480), (12, 1728)])
def test_rotate_cube_45_matches_point_in_cube(n, expected):
    out = rotate(grid(np.ones((n, n, n))), Rotation.from_axis_angle((0, 0, 1), math.pi / 4))
    assert np.array_equal(out.cells, _cube_cells_after_turn(n, math.pi / 4))
    assert out.count == expected


def test_rotate_keeps_volume_within_five_percent():
    g = grid(np.ones((12, 12, 12)))
    for axis, angle in (((0, 0, 1), math.pi / 4), ((1, 0, 0), math.pi / 4), ((0, 1, 0), math.pi / 2)):
        out = rotate(g, Rotation.from_axis_angle(axis, angle))
        assert abs(out.count - g.count) <= 0.05 * g.count


def test_rotate_composes_for_quarter_turns(rng):
    g = random_grid(rng, (6, 4, 8), 0.4)
    first = Rotation.from_axis_angle((0, 0, 1), math.pi / 2)
    second = Rotation.from_axis_angle((1, 0, 0), math.pi / 2)
    at_once = rotate(g, second @ first)
    in_turn = rotate(rotate(g, first), second)
    assert at_once.lattice.same_as(in_turn.lattice)
    assert np.array_equal(at_once.cells, in_turn.cells)
    assert at_once.count == g.count


def test_reflect_is_point_reflection(rng):
    g = random_grid(rng, (3, 4, 5), 0.5, origin=(1.0, 2.0, -3.0))
    r = reflect(g)
    assert r.lattice.origin == (-(1.0 + 2.0), -(2.0 + 3.0), -(-3.0 + 4.0))
    twice = reflect(r)
    assert twice.lattice.same_as(g.lattice)
    assert np.array_equal(twice.cells, g.cells)


# ── boolean, threshold ───────────────────────────────────────────────────────

def test_boolean_ops(rng):
    a = random_grid(rng, (4, 4, 4), 0.5)
    b = random_grid(rng, (4, 4, 4), 0.5)
    assert np.array_equal(boolean(a, b, BooleanOp.UNION).cells, a.cells | b.cells)
    assert np.array_equal(boolean(a, b, "intersect").cells, a.cells & b.cells)
    assert np.array_equal(boolean(a, b, BooleanOp.SUBTRACT).cells, a.cells & ~b.cells)


def test_boolean_needs_shared_lattice():
    a = grid(np.ones((2, 2, 2)))
    b = grid(np.ones((2, 2, 2)), origin=(1.0, 0.0, 0.0))
    with pytest.raises(LatticeMismatchException):
        boolean(a, b, BooleanOp.UNION)


def test_union_all_embeds():
    a = grid(np.ones((1, 1, 1)))
    b = grid(np.ones((1, 1, 1)), origin=(2.0, 0.0, 0.0))
    lattice = bounding_lattice([a.lattice, b.lattice])
    assert union_all([a, b], lattice).count == 2


def test_threshold_modes_partition():
    f = ScalarField(Lattice((3, 1, 1), 1.0), np.array([0.0, 0.001, 0.5]).reshape(3, 1, 1))
    above = threshold(f, 0.001, ThresholdMode.GREATER)
    below = threshold(f, 0.001, ThresholdMode.LEQ)
    assert above.cells.ravel().tolist() == [False, False, True]
    assert below.cells.ravel().tolist() == [True, True, False]


def test_threshold_rejects_negative_lambda():
    with pytest.raises(UsageException):
        threshold(ScalarField.constant(Lattice((1, 1, 1), 1.0), 0.0), -0.1)


def test_empty_grid_volume_zero():
    assert IndicatorGrid.empty(Lattice((3, 3, 3), 2.0)).volume == 0.0
