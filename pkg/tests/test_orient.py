"""Tests for direction sampling, the weighted objective and ranking."""
import numpy as np
import pytest
from pydantic import ValidationError

from app.models.results import OrientationRecord, SamplingMode
from app.schemas.config import OptimizeConfig
from app.services.orient import evaluate_orientation, optimize, rank_records, sample_directions, score_orientations, xi
from app.utils.exceptions import UsageException
from tests.geometry import no_overhang_block, open_setup, slot_part, stick_tool

V_S_MAX = 1302.53
V_GAMMA_MAX = 47.61


# ── objective ────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("v_s, v_gamma, w, expected", [
    (772, 17.22, 0.5, 0.477),
    (767, 17.99, 0.5, 0.483),
    (701, 25.05, 0.5, 0.532),
    (690, 26.37, 0.5, 0.542),
    (772, 17.22, 0.75, 0.42),
    (767, 17.99, 0.75, 0.43),
    (810, 22.57, 0.75, 0.51),
    (883, 22.75, 0.75, 0.53),
    (0, 17.22, 1.0, 0.3617),
])
def test_xi_reference_values(v_s, v_gamma, w, expected):
    assert xi(v_s, v_gamma, V_S_MAX, V_GAMMA_MAX, w) == pytest.approx(expected, abs=0.005)


def test_xi_planar_ratios():
    assert xi(0.007, 0.0, 1.0, 1.0, 0.95) == pytest.approx(0.00035, abs=1e-9)


def test_xi_zero_maximum_drops_term():
    assert xi(5.0, 0.0, 10.0, 0.0, 0.5) == pytest.approx(0.25)
    assert xi(0.0, 0.0, 0.0, 0.0, 0.5) == 0.0


@pytest.mark.parametrize("w", [-0.1, 1.5])
def test_xi_rejects_weight_out_of_range(w):
    with pytest.raises(UsageException):
        xi(1.0, 1.0, 1.0, 1.0, w)


# ── sampling ─────────────────────────────────────────────────────────────────

def test_circle_uniform_quarter_turns():
    points = sample_directions(4, SamplingMode.CIRCLE_UNIFORM)
    assert points.tolist() == [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]]


def test_circle_uniform_spacing():
    points = sample_directions(72, "circle_uniform")
    assert np.allclose(np.linalg.norm(points, axis=1), 1.0)
    assert not points[:, 2].any()
    angles = np.degrees(np.arccos(np.clip(np.sum(points * np.roll(points, -1, axis=0), axis=1), -1.0, 1.0)))
    assert np.allclose(angles, 5.0)


def test_fibonacci_points_are_spread():
    points = sample_directions(100)
    assert points.shape == (100, 3)
    assert np.allclose(np.linalg.norm(points, axis=1), 1.0)
    assert abs(points[:, 2].mean()) < 1e-12
    cosines = points @ points.T
    np.fill_diagonal(cosines, -1.0)
    min_gap = np.degrees(np.arccos(np.clip(cosines.max(), -1.0, 1.0)))
    assert min_gap > 10.0


def test_sample_count_must_be_positive():
    with pytest.raises(UsageException):
        sample_directions(0)


# ── ranking ──────────────────────────────────────────────────────────────────

def _random_records(rng, n=20, scale=1.0):
    v_s = rng.uniform(10.0, 500.0, size=n) * scale
    v_gamma = rng.uniform(0.0, 1.0, size=n) * v_s
    return [OrientationRecord(index=i, b=(0.0, 0.0, 1.0), v_s=float(a), v_gamma=float(g)) for i, (a, g) in enumerate(zip(v_s, v_gamma))]


def test_rank_with_zero_weight_sorts_by_support(rng):
    ranked = rank_records(_random_records(rng), OptimizeConfig(w_acc=0.0, n_b=20))
    volumes = [r.v_s for r in ranked]
    assert volumes == sorted(volumes)


def test_rank_with_full_weight_sorts_by_secluded(rng):
    ranked = rank_records(_random_records(rng), OptimizeConfig(w_acc=1.0, n_b=20))
    volumes = [r.v_gamma for r in ranked]
    assert volumes == sorted(volumes)


def test_rank_xi_bounded_and_ascending(rng):
    ranked = rank_records(_random_records(rng), OptimizeConfig(w_acc=0.3, n_b=20))
    values = [r.xi for r in ranked]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert values == sorted(values)


def test_rank_is_scale_invariant(rng):
    seed = int(rng.integers(1 << 30))
    cfg = OptimizeConfig(w_acc=0.6, n_b=20)
    base = rank_records(_random_records(np.random.default_rng(seed)), cfg)
    scaled = rank_records(_random_records(np.random.default_rng(seed), scale=7.5), cfg)
    assert [r.index for r in base] == [r.index for r in scaled]


def test_rank_uses_fixed_maxima():
    records = [OrientationRecord(index=0, b=(0.0, 0.0, 1.0), v_s=772.0, v_gamma=17.22)]
    cfg = OptimizeConfig(w_acc=0.5, n_b=1, n_b_star=1, v_s_max=V_S_MAX, v_gamma_max=V_GAMMA_MAX)
    (ranked,) = rank_records(records, cfg)
    assert ranked.xi == pytest.approx(0.477, abs=0.005)


def test_rank_breaks_ties_by_secluded_then_index():
    records = [
        OrientationRecord(index=0, b=(0.0, 0.0, 1.0), v_s=10.0, v_gamma=5.0),
        OrientationRecord(index=1, b=(0.0, 0.0, -1.0), v_s=10.0, v_gamma=2.0),
        OrientationRecord(index=2, b=(1.0, 0.0, 0.0), v_s=10.0, v_gamma=2.0),
    ]
    ranked = rank_records(records, OptimizeConfig(w_acc=0.0, n_b=3, n_b_star=1))
    assert [r.index for r in ranked] == [1, 2, 0]


def test_config_rejects_more_kept_than_sampled():
    with pytest.raises(ValidationError):
        OptimizeConfig(n_b=3, n_b_star=5)


# ── evaluation ───────────────────────────────────────────────────────────────

def test_no_overhang_part_scores_zero():
    cfg = OptimizeConfig(n_b=1, n_b_star=1)
    record = evaluate_orientation(no_overhang_block(), open_setup([stick_tool()]), (0.0, 0.0, 1.0), cfg, index=3)
    assert (record.index, record.v_s, record.v_gamma) == (3, 0.0, 0.0)


def test_non_unit_direction_rejected():
    cfg = OptimizeConfig(n_b=1, n_b_star=1)
    with pytest.raises(UsageException):
        evaluate_orientation(no_overhang_block(), open_setup([stick_tool()]), (0.0, 0.0, 2.0), cfg)


def test_slot_orientations_with_single_rotation():
    setup = open_setup([stick_tool(rotations=stick_tool().rotations[:1])])
    cfg = OptimizeConfig(w_acc=1.0, n_b=2, n_b_star=2, mode="circle_uniform", alpha_deg=90.0, lam=0.001)
    ranked = score_orientations(slot_part(), setup, cfg)
    best, worst = ranked
    assert best.b == (0.0, 1.0, 0.0)
    assert (best.v_s, best.v_gamma) == (100.0, 40.0)
    assert (worst.v_s, worst.v_gamma) == (100.0, 60.0)
    assert best.xi == pytest.approx(2.0 / 3.0)
    assert worst.xi == pytest.approx(1.0)


def test_optimize_keeps_best_and_ignores_workers():
    setup = open_setup([stick_tool(rotations=stick_tool().rotations[:1])])
    cfg = OptimizeConfig(w_acc=0.0, n_b=4, n_b_star=1, mode="circle_uniform")
    serial = optimize(slot_part(), setup, cfg, workers=1)
    threaded = optimize(slot_part(), setup, cfg, workers=3)
    assert len(serial) == 1
    assert [(r.index, r.v_s, r.v_gamma, r.xi) for r in serial] == [(r.index, r.v_s, r.v_gamma, r.xi) for r in threaded]
