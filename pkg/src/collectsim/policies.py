"""Collector routing policies, interchangeable over the engine's action
interface.

Single-collector policies accept an optional subregion (origin and area) so
the partitioned multi-collector policy can run one instance per subregion;
by default they operate on the whole region. Policy objects are one-shot:
``attach`` initializes all mutable state at the start of a run.
"""

from __future__ import annotations

import math
from collections import deque
from enum import Enum

from .commmodel import in_range, reception_point
from .core import (ConfigurationError, Message, Point, ScenarioConfig,
                   build_grid)
from .engine import Action, Receive, Simulation, TravelTo, WAIT
from .tspn import plan_tour


class PolicyKind(str, Enum):
    FCFS = "fcfs"
    FCFS_RETURN = "fcfs_return"
    TSPN_CYCLIC = "tspn_cyclic"
    GRID_PARTITIONING = "grid_partitioning"
    MULTI_PARTITIONING = "multi_partitioning"


class _SingleCollectorPolicy:
    """Shared subregion plumbing for policies driving one collector."""

    def __init__(self, collector_id: int = 0, origin: Point | None = None,
                 area: float | None = None) -> None:
        self.collector_id = collector_id
        self._origin = origin
        self._area = area

    def _region(self, sim: Simulation) -> tuple[Point, float]:
        origin = self._origin if self._origin is not None else Point(0.0, 0.0)
        area = self._area if self._area is not None else sim.config.area
        return origin, area

    def _region_center(self, sim: Simulation) -> Point:
        origin, area = self._region(sim)
        half = math.sqrt(area) / 2.0
        return Point(origin.x + half, origin.y + half)


class Fcfs(_SingleCollectorPolicy):
    """Serve messages strictly in arrival order: drive to the oldest
    message's reception point, receive, move on to the next."""

    name = "fcfs"

    def attach(self, sim: Simulation) -> None:
        self.queue: deque[int] = deque()
        sim.collectors[self.collector_id].position = self._region_center(sim)

    def on_arrival(self, sim: Simulation, msg: Message) -> None:
        self.queue.append(msg.id)

    def next_action(self, sim: Simulation, collector_id: int) -> Action:
        if not self.queue:
            return WAIT
        collector = sim.collectors[collector_id]
        target = sim.messages[self.queue[0]].location
        if in_range(collector.position, target, sim.radius):
            return Receive(self.queue.popleft())
        return TravelTo(reception_point(collector.position, target, sim.radius))


class FcfsReturn(_SingleCollectorPolicy):
    """Arrival-order service with a twist: after every reception the
    collector first returns to the region center before the next decision."""

    name = "fcfs_return"

    def attach(self, sim: Simulation) -> None:
        self.queue: deque[int] = deque()
        self.center = self._region_center(sim)
        self._return_due = False
        sim.collectors[self.collector_id].position = self.center

    def on_arrival(self, sim: Simulation, msg: Message) -> None:
        self.queue.append(msg.id)

    def next_action(self, sim: Simulation, collector_id: int) -> Action:
        if self._return_due:
            self._return_due = False
            return TravelTo(self.center)
        if not self.queue:
            return WAIT
        collector = sim.collectors[collector_id]
        target = sim.messages[self.queue[0]].location
        if in_range(collector.position, target, sim.radius):
            self._return_due = True
            return Receive(self.queue.popleft())
        return TravelTo(reception_point(collector.position, target, sim.radius))


class TspnCyclic(_SingleCollectorPolicy):
    """Epoch service from the region center: freeze the pending set, plan
    one closed tour through all of its reception disks, execute it, return
    to the center. Arrivals during a tour wait for the next epoch.

    ``epochs`` logs (start time, frozen message ids, planner, tour length)
    per epoch for inspection.
    """

    name = "tspn_cyclic"

    def attach(self, sim: Simulation) -> None:
        origin, area = self._region(sim)
        self.grid = build_grid(area, sim.radius, origin)
        self.center = self.grid.center
        self.pending: list[int] = []
        self.script: deque[Action] = deque()
        self.epochs: list[tuple[float, tuple[int, ...], str, float]] = []
        sim.collectors[self.collector_id].position = self.center

    def on_arrival(self, sim: Simulation, msg: Message) -> None:
        self.pending.append(msg.id)

    def next_action(self, sim: Simulation, collector_id: int) -> Action:
        if self.script:
            return self.script.popleft()
        if not self.pending:
            return WAIT
        batch = [sim.messages[i] for i in self.pending]
        tour = plan_tour(batch, self.grid, sim.radius, self.center)
        self.epochs.append((sim.time, tuple(self.pending), tour.method,
                            tour.total_length))
        self.pending.clear()
        for stop in tour.stops:
            self.script.append(TravelTo(stop.point))
            for mid in stop.message_ids:
                self.script.append(Receive(mid))
        self.script.append(TravelTo(self.center))
        return self.script.popleft()


class GridPartitioning(_SingleCollectorPolicy):
    """Sweep the covering grid's cells in cyclic order, exhausting each
    cell's queue from its center before hopping to the next cell. The
    collector keeps cycling when everything is empty (reservation travel is
    always paid), except that it parks when the grid is a single cell or
    when motion is instantaneous and there is nothing anywhere."""

    name = "grid_partitioning"

    def attach(self, sim: Simulation) -> None:
        origin, area = self._region(sim)
        self.grid = build_grid(area, sim.radius, origin)
        self.queues = [deque() for _ in range(self.grid.num_cells)]
        self.cursor = 0
        sim.collectors[self.collector_id].position = self.grid.cell_centers[0]

    def on_arrival(self, sim: Simulation, msg: Message) -> None:
        self.queues[self.grid.cell_index(msg.location)].append(msg.id)

    def next_action(self, sim: Simulation, collector_id: int) -> Action:
        queue = self.queues[self.cursor]
        if queue:
            return Receive(queue.popleft())
        if self.grid.num_cells == 1:
            return WAIT
        if math.isinf(sim.config.speed) and not any(self.queues):
            return WAIT  # zero-time hops forever would not advance the clock
        self.cursor = (self.cursor + 1) % self.grid.num_cells
        return TravelTo(self.grid.cell_centers[self.cursor])


class MultiPartitioning:
    """Split the region into equal square subregions, one collector each,
    and run an independent single-collector policy per subregion. Message
    to collector assignment is a pure function of location."""

    name = "multi_partitioning"

    def __init__(self, inner: PolicyKind = PolicyKind.GRID_PARTITIONING) -> None:
        if inner == PolicyKind.MULTI_PARTITIONING:
            raise ConfigurationError("inner policy cannot itself be partitioned")
        self.inner_kind = inner

    def attach(self, sim: Simulation) -> None:
        m = sim.config.collectors
        j = math.isqrt(m)
        if j * j != m:
            raise ConfigurationError(
                f"multi_partitioning needs a square number of collectors, "
                f"got {m}")
        self.per_side = j
        self.sub_side = sim.config.side / j
        self.inners: list[_SingleCollectorPolicy] = []
        for i in range(m):
            row, col = divmod(i, j)
            origin = Point(col * self.sub_side, row * self.sub_side)
            # j == 1 passes the configured area through untouched so the
            # reduction to the plain single-collector policy is bit-exact
            area = sim.config.area if j == 1 else self.sub_side ** 2
            inner = _SINGLE_KINDS[self.inner_kind](
                collector_id=i, origin=origin, area=area)
            inner.attach(sim)
            sim.collectors[i].subregion = i
            self.inners.append(inner)

    def subregion_of(self, p: Point) -> int:
        j = self.per_side
        col = min(j - 1, max(0, int(p.x / self.sub_side)))
        row = min(j - 1, max(0, int(p.y / self.sub_side)))
        return row * j + col

    def on_arrival(self, sim: Simulation, msg: Message) -> None:
        self.inners[self.subregion_of(msg.location)].on_arrival(sim, msg)

    def next_action(self, sim: Simulation, collector_id: int) -> Action:
        return self.inners[collector_id].next_action(sim, collector_id)


_SINGLE_KINDS = {
    PolicyKind.FCFS: Fcfs,
    PolicyKind.FCFS_RETURN: FcfsReturn,
    PolicyKind.TSPN_CYCLIC: TspnCyclic,
    PolicyKind.GRID_PARTITIONING: GridPartitioning,
}


def make_policy(kind: PolicyKind | str, config: ScenarioConfig,
                inner: PolicyKind | str = PolicyKind.GRID_PARTITIONING):
    """Build a fresh policy instance for one run, validating the collector
    count against the chosen kind."""
    kind = PolicyKind(kind)
    if kind == PolicyKind.MULTI_PARTITIONING:
        j = math.isqrt(config.collectors)
        if j * j != config.collectors:
            raise ConfigurationError(
                f"multi_partitioning needs a square number of collectors, "
                f"got {config.collectors}")
        return MultiPartitioning(inner=PolicyKind(inner))
    if config.collectors != 1:
        raise ConfigurationError(
            f"policy {kind.value!r} drives a single collector; "
            f"configure collectors=1 or use multi_partitioning")
    return _SINGLE_KINDS[kind]()
