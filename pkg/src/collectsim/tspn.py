"""Closed-tour planning over message reception disks.

A collector serving a batch of messages needs a closed walk from its start
point that enters every message's reception disk. Two planners are provided:
a sweep over the covering grid's nonempty cells (bounded length regardless of
batch size) and a nearest-disk greedy construction polished by 2-opt, which
wins when messages are few or clustered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .commmodel import _RANGE_SLACK, reception_point
from .core import Point, RegionGrid, distance


@dataclass(frozen=True, slots=True)
class TourStop:
    """One standing point and the messages received from it."""

    point: Point
    message_ids: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Tour:
    """Closed tour: start -> each stop in order -> end (= start)."""

    stops: tuple[TourStop, ...]
    total_length: float
    start: Point
    end: Point
    method: str

    @property
    def message_ids(self) -> tuple[int, ...]:
        return tuple(i for stop in self.stops for i in stop.message_ids)


def tour_cap(grid: RegionGrid) -> float:
    """Length budget no grid-cover tour exceeds: one cell-side hop per cell
    plus the grid cycle's closing edge."""
    return grid.num_cells * grid.cell_side + grid.closing_edge


def tsp_upper_bound(n: int, area: float) -> float:
    """Worst-case length of an optimal closed tour through n points in a
    square region of the given area."""
    if n < 0:
        raise ValueError(f"point count must be non-negative, got {n}")
    if not area > 0:
        raise ValueError(f"area must be positive, got {area}")
    if n == 0:
        return 0.0
    return math.sqrt(2.0 * n * area) + 1.75 * math.sqrt(area)


def _closed_length(points: Sequence[Point], start: Point) -> float:
    total = 0.0
    prev = start
    for p in points:
        total += distance(prev, p)
        prev = p
    return total + distance(prev, start)


# --------------------------------------------------------------------------
# grid sweep planner


def grid_cover_tour(messages: Sequence, grid: RegionGrid,
                    start: Point | None = None) -> Tour:
    """Visit the centers of the grid cells that hold messages, in grid cycle
    order, entering the cycle at the rotation that minimizes total length.

    Every message is receivable from its cell center by construction of the
    grid. Within a stop, messages keep their input order.
    """
    if start is None:
        start = grid.center
    buckets: dict[int, list[int]] = {}
    for msg in messages:
        buckets.setdefault(grid.cell_index(msg.location), []).append(msg.id)
    if not buckets:
        return Tour((), 0.0, start, start, "grid_cover")
    order = sorted(buckets)
    pts = [grid.cell_centers[i] for i in order]
    m = len(pts)
    if m == 1:
        stop = TourStop(pts[0], tuple(buckets[order[0]]))
        return Tour((stop,), 2.0 * distance(start, pts[0]), start, start,
                    "grid_cover")

    seg = [distance(pts[i], pts[(i + 1) % m]) for i in range(m)]
    perimeter = sum(seg)
    best_j, best_len = 0, math.inf
    for j in range(m):
        # enter at pts[j], leave from pts[j-1]; the cyclic edge between them
        # is the one the start point replaces
        length = (perimeter - seg[j - 1]
                  + distance(start, pts[j]) + distance(pts[j - 1], start))
        if length < best_len - 1e-12:
            best_j, best_len = j, length
    stops = tuple(
        TourStop(pts[(best_j + i) % m], tuple(buckets[order[(best_j + i) % m]]))
        for i in range(m))
    return Tour(stops, best_len, start, start, "grid_cover")


# --------------------------------------------------------------------------
# nearest-disk greedy + 2-opt planner


def _greedy_stops(messages: Sequence, radius: float,
                  start: Point) -> list[tuple[Point, list[int]]]:
    ids = [m.id for m in messages]
    xs = np.array([m.location.x for m in messages], dtype=float)
    ys = np.array([m.location.y for m in messages], dtype=float)
    slack = radius * (1.0 + _RANGE_SLACK)
    unserved = np.ones(len(ids), dtype=bool)
    cx, cy = start.x, start.y
    stops: list[tuple[Point, list[int]]] = []
    while unserved.any():
        idx = np.flatnonzero(unserved)
        d = np.hypot(xs[idx] - cx, ys[idx] - cy)
        j = idx[int(np.argmin(np.maximum(d - radius, 0.0)))]
        dj = math.hypot(xs[j] - cx, ys[j] - cy)
        if dj <= slack:
            px, py = cx, cy
        else:
            f = (dj - radius) / dj
            px, py = cx + f * (xs[j] - cx), cy + f * (ys[j] - cy)
        served = np.flatnonzero(unserved
                                & (np.hypot(xs - px, ys - py) <= slack))
        unserved[served] = False
        stops.append((Point(px, py), [ids[i] for i in served]))
        cx, cy = px, py
    return stops


def _two_opt_pass(points: list[Point], start: Point) -> list[int] | None:
    """One best-improvement 2-opt move on the stop order; None if no move
    improves."""
    n = len(points)
    if n < 3:
        return None
    coords = np.empty((n + 2, 2))
    coords[0] = coords[-1] = (start.x, start.y)
    for i, p in enumerate(points, start=1):
        coords[i] = (p.x, p.y)
    diffs = np.diff(coords, axis=0)
    edge = np.hypot(diffs[:, 0], diffs[:, 1])  # edge[i] = |P[i] P[i+1]|
    best_gain, best_move = 1e-9, None
    for i in range(1, n):
        # reversing P[i..j] replaces edges (i-1,i) and (j,j+1)
        js = np.arange(i + 1, n + 1)
        new1 = np.hypot(coords[js, 0] - coords[i - 1, 0],
                        coords[js, 1] - coords[i - 1, 1])
        new2 = np.hypot(coords[js + 1, 0] - coords[i, 0],
                        coords[js + 1, 1] - coords[i, 1])
        gains = edge[i - 1] + edge[js] - new1 - new2
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain, best_move = gains[k], (i, int(js[k]))
    if best_move is None:
        return None
    i, j = best_move
    order = list(range(n))
    order[i - 1:j] = reversed(order[i - 1:j])
    return order


def _reproject(stops: list[tuple[Point, list[int]]], radius: float,
               start: Point, locate) -> list[tuple[Point, list[int]]]:
    # pull single-message stops toward the previous stop; batched stops keep
    # their point so coverage of the whole batch is preserved
    out: list[tuple[Point, list[int]]] = []
    prev = start
    for point, mids in stops:
        if len(mids) == 1:
            point = reception_point(prev, locate(mids[0]), radius)
        out.append((point, mids))
        prev = point
    return out


def nn_tspn_tour(messages: Sequence, radius: float, start: Point) -> Tour:
    """Greedy nearest-disk tour through all message reception disks,
    improved by 2-opt reordering with boundary-point re-projection.

    The result is never longer than the plain greedy construction: each
    improvement round is kept only if the re-projected tour got shorter.
    """
    if not messages:
        return Tour((), 0.0, start, start, "tspn")
    by_id = {m.id: m.location for m in messages}
    stops = _greedy_stops(messages, radius, start)
    best = stops
    best_len = _closed_length([p for p, _ in stops], start)
    for _ in range(8):
        order = _two_opt_pass([p for p, _ in best], start)
        if order is None:
            break
        candidate = _reproject([best[i] for i in order], radius, start,
                               by_id.__getitem__)
        cand_len = _closed_length([p for p, _ in candidate], start)
        if cand_len < best_len - 1e-12:
            best, best_len = candidate, cand_len
        else:
            break
    tour_stops = tuple(TourStop(p, tuple(mids)) for p, mids in best)
    return Tour(tour_stops, best_len, start, start, "tspn")


def plan_tour(messages: Sequence, grid: RegionGrid, radius: float,
              start: Point | None = None) -> Tour:
    """Plan the shorter of the grid sweep and the greedy disk tour."""
    if start is None:
        start = grid.center
    if not messages:
        return Tour((), 0.0, start, start, "empty")
    cover = grid_cover_tour(messages, grid, start)
    greedy = nn_tspn_tour(messages, radius, start)
    return greedy if greedy.total_length < cover.total_length else cover
