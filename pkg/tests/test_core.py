"""Region geometry, scenario validation and the serpentine cell cycle."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collectsim.core import (ConfigurationError, Message, Point, RegionGrid,
                             ScenarioConfig, build_grid, distance,
                             uniform_point)

R_17DB = (10.0 ** 1.7 / 2.0) ** 0.25
R_20DB = (10.0 ** 2.0 / 2.0) ** 0.25


# -- points ------------------------------------------------------------------


def test_point_is_frozen():
    p = Point(1.0, 2.0)
    with pytest.raises(AttributeError):
        p.x = 3.0  # type: ignore[misc]


def test_distance_euclidean():
    assert distance(Point(0, 0), Point(3, 4)) == 5.0
    assert distance(Point(-1, -1), Point(-1, -1)) == 0.0


def test_uniform_point_bounds_and_origin():
    rng = np.random.default_rng(7)
    for _ in range(200):
        p = uniform_point(rng, 3.0, Point(10.0, 20.0))
        assert 10.0 <= p.x <= 13.0
        assert 20.0 <= p.y <= 23.0


def test_uniform_point_deterministic():
    a = [uniform_point(np.random.default_rng(5), 2.0) for _ in range(1)][0]
    b = [uniform_point(np.random.default_rng(5), 2.0) for _ in range(1)][0]
    assert a == b


# -- scenario configuration ---------------------------------------------------


def _config(**overrides) -> ScenarioConfig:
    base = dict(area=60.0, arrival_rate=0.25, reception_time=2.0, speed=10.0,
                snr_ref=10.0 ** 1.7, snr_threshold=2.0, path_loss=4.0,
                collectors=1, seed=0)
    base.update(overrides)
    return ScenarioConfig(**base)


def test_config_derived_properties():
    cfg = _config()
    assert cfg.side == pytest.approx(math.sqrt(60.0))
    assert cfg.center.x == pytest.approx(cfg.side / 2.0)
    assert cfg.center.y == pytest.approx(cfg.side / 2.0)
    assert cfg.load == pytest.approx(0.25 * 2.0 / 1)


def test_config_load_splits_across_collectors():
    cfg = _config(collectors=4, arrival_rate=1.0)
    assert cfg.load == pytest.approx(1.0 * 2.0 / 4)


@pytest.mark.parametrize("field,value", [
    ("area", 0.0), ("area", -1.0),
    ("arrival_rate", 0.0),
    ("reception_time", 0.0),
    ("speed", 0.0), ("speed", -2.0),
    ("snr_ref", 0.0),
    ("snr_threshold", 0.0),
    ("path_loss", 1.9), ("path_loss", 6.1),
    ("collectors", 0),
])
def test_config_rejects_bad_values(field, value):
    with pytest.raises(ConfigurationError):
        _config(**{field: value})


def test_config_allows_infinite_speed():
    assert math.isinf(_config(speed=math.inf).speed)


def test_message_delay_property():
    msg = Message(id=0, arrival_time=1.5, location=Point(0, 0),
                  departure_time=4.0)
    assert msg.delay == pytest.approx(2.5)


# -- grid construction against hand-computed geometry -------------------------

GRID_TABLE = [
    # (area, radius, k, num_cells, cell_side, effective_radius)
    (60.0, R_17DB, 3, 9, 2.581989, 1.825742),
    (800.0, R_17DB, 9, 81, 3.142697, 2.222222),
    (125.0, R_20DB, 3, 9, 3.726780, 2.635231),
    (200.0, 5.0, 2, 4, 7.071068, 5.000000),
    (800.0, 2.2, 10, 100, 2.828427, 2.000000),
    (200.0, 2.2, 5, 25, 2.828427, 2.000000),
]


@pytest.mark.parametrize("area,radius,k,n_s,cell_side,eff", GRID_TABLE)
def test_grid_table(area, radius, k, n_s, cell_side, eff):
    g = build_grid(area, radius)
    assert g.cells_per_side == k
    assert g.num_cells == n_s
    assert g.cell_side == pytest.approx(cell_side, abs=1e-6)
    assert g.effective_radius == pytest.approx(eff, abs=1e-6)


def test_grid_single_cell_region():
    g = build_grid(4.0, 4.0)
    assert g.num_cells == 1
    assert g.closing_edge == 0.0
    assert g.cycle_length == 0.0
    assert g.cell_centers[0] == g.center


def test_grid_cycle_visits_every_cell_once():
    for k in range(1, 11):
        area = float(k * k)  # unit cells when radius = 1/sqrt(2)
        g = build_grid(area, 1.0 / math.sqrt(2.0) + 1e-9)
        assert g.cells_per_side == k
        assert len(g.cell_centers) == k * k
        assert len(set(g.cell_centers)) == k * k


def test_grid_cycle_hops_are_one_cell_side():
    for k in range(2, 11):
        g = build_grid(float(k * k), 1.0 / math.sqrt(2.0) + 1e-9)
        hops = [distance(a, b)
                for a, b in zip(g.cell_centers, g.cell_centers[1:])]
        assert all(h == pytest.approx(g.cell_side, rel=1e-12) for h in hops)
        expected_closing = (g.cell_side if k % 2 == 0
                            else (k // 2) * math.sqrt(2.0) * g.cell_side)
        assert g.closing_edge == pytest.approx(expected_closing, rel=1e-12)
        assert g.cycle_length == pytest.approx(
            (k * k - 1) * g.cell_side + g.closing_edge, rel=1e-12)


def test_grid_cycle_ends_adjacent_to_start():
    # closing the loop costs one hop for even side counts and the ring-walk
    # diagonal for odd ones
    g4 = build_grid(16.0, 1.0 / math.sqrt(2.0) + 1e-9)
    assert distance(g4.cell_centers[-1], g4.cell_centers[0]) == pytest.approx(
        g4.cell_side)
    g5 = build_grid(25.0, 1.0 / math.sqrt(2.0) + 1e-9)
    assert distance(g5.cell_centers[-1], g5.cell_centers[0]) == pytest.approx(
        g5.closing_edge)


def test_grid_cell_index_roundtrip():
    g = build_grid(200.0, 2.2)
    for i, c in enumerate(g.cell_centers):
        assert g.cell_index(c) == i


def test_grid_cell_index_clamps_outside_points():
    g = build_grid(200.0, 2.2)
    side = g.side
    assert 0 <= g.cell_index(Point(-1.0, -1.0)) < g.num_cells
    assert 0 <= g.cell_index(Point(side + 1.0, side + 1.0)) < g.num_cells


def test_grid_covers_region_within_effective_radius():
    g = build_grid(60.0, R_17DB)
    rng = np.random.default_rng(0)
    for _ in range(500):
        p = uniform_point(rng, g.side)
        c = g.cell_centers[g.cell_index(p)]
        # half-diagonal of a cell equals the effective radius, so every point
        # of a cell is reachable from the cell center
        assert distance(p, c) <= g.effective_radius * (1 + 1e-9)
        assert abs(p.x - c.x) <= g.cell_side / 2 * (1 + 1e-9)
        assert abs(p.y - c.y) <= g.cell_side / 2 * (1 + 1e-9)


def test_build_grid_rejects_bad_inputs():
    with pytest.raises(ConfigurationError):
        build_grid(0.0, 1.0)
    with pytest.raises(ConfigurationError):
        build_grid(10.0, 0.0)


@settings(deadline=None, max_examples=60)
@given(area=st.floats(min_value=1.0, max_value=1e4),
       radius=st.floats(min_value=0.05, max_value=50.0))
def test_grid_cell_count_is_minimal_cover(area, radius):
    g = build_grid(area, radius)
    k = g.cells_per_side
    assert k >= 1
    assert k * g.cell_side == pytest.approx(g.side, rel=1e-9)
    # chosen k keeps every cell coverable from its center
    assert g.effective_radius <= radius * (1 + 1e-9)
    # and is the smallest such count
    if k > 1:
        coarser_eff = g.side / (k - 1) / math.sqrt(2.0)
        assert coarser_eff > radius * (1 - 1e-9)
