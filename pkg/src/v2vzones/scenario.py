"""Manhattan street grid, vehicle mobility, and line-of-sight geometry."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# (length, width) presets in meters; metadata only, the channel never reads them
VEHICLE_SIZE_CLASSES = ((4.5, 1.8), (5.5, 2.0), (7.0, 2.3), (12.0, 2.5))

TURN_STRAIGHT = "straight"
TURN_LEFT = "left"
TURN_RIGHT = "right"

_EPS = 1e-9


@dataclass(frozen=True)
class Road:
    """One bi-directional street, modeled as an axis with a directed lane per side."""

    index: int
    orientation: str  # 'h' (runs along x) or 'v' (runs along y)
    center: float     # y for 'h' roads, x for 'v' roads
    crossings: tuple[float, ...]  # coordinates (along the axis) of intersection centers

    @property
    def lo(self) -> float:
        return self.crossings[0]

    @property
    def hi(self) -> float:
        return self.crossings[-1]


@dataclass(frozen=True)
class GridLayout:
    """Axis-aligned block pattern: buildings separated by two-lane streets."""

    building_breadth: float
    lane_width: float
    bounds: tuple[float, float]
    buildings: np.ndarray          # (B, 4) xmin, ymin, xmax, ymax
    roads: tuple[Road, ...]
    waypoints: np.ndarray          # (W, 2) intersection centers
    waypoint_route: np.ndarray     # (W, W) center-to-center distance, inf if not mutually visible

    @property
    def road_width(self) -> float:
        return 2.0 * self.lane_width


def build_manhattan_grid(building_breadth: float = 100.0, blocks_x: int = 2,
                         blocks_y: int = 2, lane_width: float = 3.5) -> GridLayout:
    """Build a blocks_x-by-blocks_y block pattern with streets on every side.

    Default reproduces a four-building layout of 100 m blocks separated by
    bi-directional two-lane roads, with roads also on the perimeter.
    """
    if building_breadth <= 0:
        raise ValueError(f"building_breadth must be positive, got {building_breadth}")
    if lane_width <= 0:
        raise ValueError(f"lane_width must be positive, got {lane_width}")
    if blocks_x < 1 or blocks_y < 1:
        raise ValueError("grid needs at least one building block per axis")

    rw = 2.0 * lane_width
    width = (blocks_x + 1) * rw + blocks_x * building_breadth
    height = (blocks_y + 1) * rw + blocks_y * building_breadth

    v_centers = [rw / 2 + i * (rw + building_breadth) for i in range(blocks_x + 1)]
    h_centers = [rw / 2 + j * (rw + building_breadth) for j in range(blocks_y + 1)]

    buildings = []
    for i in range(blocks_x):
        for j in range(blocks_y):
            x0 = rw + i * (rw + building_breadth)
            y0 = rw + j * (rw + building_breadth)
            buildings.append((x0, y0, x0 + building_breadth, y0 + building_breadth))
    buildings = np.asarray(buildings, dtype=float)

    roads = []
    for x in v_centers:
        roads.append(Road(len(roads), "v", x, tuple(h_centers)))
    for y in h_centers:
        roads.append(Road(len(roads), "h", y, tuple(v_centers)))
    roads = tuple(roads)

    waypoints = np.array([(x, y) for y in h_centers for x in v_centers], dtype=float)
    route = _waypoint_routes(waypoints, buildings)
    return GridLayout(building_breadth, lane_width, (width, height), buildings,
                      roads, waypoints, route)


def _waypoint_routes(waypoints: np.ndarray, buildings: np.ndarray) -> np.ndarray:
    w = len(waypoints)
    dist = np.hypot(waypoints[:, None, 0] - waypoints[None, :, 0],
                    waypoints[:, None, 1] - waypoints[None, :, 1])
    a = np.repeat(waypoints, w, axis=0)
    b = np.tile(waypoints, (w, 1))
    blocked = segments_blocked(a, b, buildings).reshape(w, w)
    dist[blocked] = np.inf
    np.fill_diagonal(dist, np.inf)
    return dist


def segments_blocked(a: np.ndarray, b: np.ndarray, buildings: np.ndarray) -> np.ndarray:
    """True where the open segment a->b passes through a building interior.

    a, b: (M, 2). Grazing a wall does not count as blocked.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    m = a.shape[0]
    out = np.zeros(m, dtype=bool)
    if len(buildings) == 0:
        return out
    d = b - a
    for rect in buildings:
        t0 = np.zeros(m)
        t1 = np.ones(m)
        ok = np.ones(m, dtype=bool)
        for axis in range(2):
            lo, hi = rect[axis], rect[axis + 2]
            da = d[:, axis]
            pa = a[:, axis]
            par = np.abs(da) < _EPS
            # parallel to this slab: must already be strictly inside it
            ok &= ~par | ((pa > lo + _EPS) & (pa < hi - _EPS))
            with np.errstate(divide="ignore", invalid="ignore"):
                tl = (lo - pa) / da
                th = (hi - pa) / da
            tlo = np.where(par, 0.0, np.minimum(tl, th))
            thi = np.where(par, 1.0, np.maximum(tl, th))
            t0 = np.maximum(t0, tlo)
            t1 = np.minimum(t1, thi)
        enter = np.maximum(t0, 0.0)
        exit_ = np.minimum(t1, 1.0)
        seg_len = np.hypot(d[:, 0], d[:, 1])
        # require the overlap to have real length so wall-touching stays LOS
        out |= ok & ((exit_ - enter) * seg_len > 1e-6)
    return out


def is_los(a, b, grid: GridLayout) -> bool:
    """True iff the open segment between a and b crosses no building."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.allclose(a, b):
        return True
    return not bool(segments_blocked(a[None, :], b[None, :], grid.buildings)[0])


@dataclass
class Vehicle:
    id: int
    pair_id: int
    road: int
    direction: int        # +1 toward increasing axis coordinate, -1 opposite
    s: float              # position along the road axis
    speed: float          # m/s
    length: float
    width: float
    turn_cursor: int = 0
    position: np.ndarray = field(default_factory=lambda: np.zeros(2))
    heading: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def lane(self) -> tuple[int, int]:
        return (self.road, self.direction)


def _sync_pose(v: Vehicle, grid: GridLayout) -> Vehicle:
    road = grid.roads[v.road]
    half = grid.lane_width / 2.0
    if road.orientation == "v":
        heading = np.array([0.0, float(v.direction)])
        pos = np.array([road.center + v.direction * half, v.s])
    else:
        heading = np.array([float(v.direction), 0.0])
        pos = np.array([v.s, road.center - v.direction * half])
    v.position = pos
    v.heading = heading
    return v


def vehicle_position(v: Vehicle, grid: GridLayout) -> np.ndarray:
    return _sync_pose(v, grid).position


class TurnPlanner:
    """Per-pair shared turn decisions so a tx/rx couple stays co-moving.

    Decisions are drawn lazily from the rng the first time either member of the
    pair reaches the n-th intersection of its path, then replayed for the other.
    """

    def __init__(self, rng: np.random.Generator,
                 probs: tuple[float, float, float] = (0.5, 0.25, 0.25)):
        self.rng = rng
        self.probs = {TURN_STRAIGHT: probs[0], TURN_LEFT: probs[1], TURN_RIGHT: probs[2]}
        self._decided: dict[int, list[str]] = {}

    def decide(self, pair_id: int, cursor: int, options: list[str]) -> str:
        seq = self._decided.setdefault(pair_id, [])
        if cursor < len(seq):
            return seq[cursor]
        weights = [self.probs[o] for o in options]
        total = sum(weights)
        if total <= 0:
            choice = options[0]
        else:
            u = self.rng.random() * total
            acc = 0.0
            choice = options[-1]
            for opt, w in zip(options, weights):
                acc += w
                if u < acc:
                    choice = opt
                    break
        seq.append(choice)
        return choice


class FixedTurns:
    """Deterministic stand-in for TurnPlanner used by tests."""

    def __init__(self, turns):
        self.turns = list(turns)

    def decide(self, pair_id: int, cursor: int, options: list[str]) -> str:
        turn = self.turns[cursor % len(self.turns)]
        return turn if turn in options else options[0]


def _turn_outcome(grid: GridLayout, road: Road, direction: int, at: float, turn: str):
    """(new_road_index, new_direction, new_s) after `turn` at axis coordinate `at`."""
    if turn == TURN_STRAIGHT:
        return road.index, direction, at
    if road.orientation == "v":
        heading = (0.0, float(direction))
    else:
        heading = (float(direction), 0.0)
    if turn == TURN_RIGHT:
        nh = (heading[1], -heading[0])
    else:
        nh = (-heading[1], heading[0])
    cross = _crossing_road(grid, road, at)
    new_dir = int(nh[0]) if cross.orientation == "h" else int(nh[1])
    return cross.index, new_dir, road.center


def _crossing_road(grid: GridLayout, road: Road, at: float) -> Road:
    want = "h" if road.orientation == "v" else "v"
    for r in grid.roads:
        if r.orientation == want and abs(r.center - at) < 1e-6:
            return r
    raise ValueError(f"no crossing road at coordinate {at}")


def _valid_turns(grid: GridLayout, road: Road, direction: int, at: float) -> list[str]:
    options = []
    for turn in (TURN_STRAIGHT, TURN_LEFT, TURN_RIGHT):
        idx, nd, ns = _turn_outcome(grid, road, direction, at, turn)
        target = grid.roads[idx]
        if (nd > 0 and ns < target.hi - _EPS) or (nd < 0 and ns > target.lo + _EPS):
            options.append(turn)
    return options


def step_mobility(vehicles: list[Vehicle], grid: GridLayout, dt: float,
                  planner) -> list[Vehicle]:
    """Advance every vehicle speed*dt along its lane, turning at intersections.

    At intersections the shared per-pair planner picks straight/left/right;
    options that would leave the grid (perimeter ends) are filtered out, so
    vehicles stay on the street network and the fleet size is constant.
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    out = []
    for v in vehicles:
        nv = replace(v, position=v.position.copy(), heading=v.heading.copy())
        remaining = nv.speed * dt
        while remaining > _EPS:
            road = grid.roads[nv.road]
            ahead = [c for c in road.crossings if (c - nv.s) * nv.direction > _EPS]
            if not ahead:
                nv.s += nv.direction * remaining
                break
            nxt = min(ahead, key=lambda c: (c - nv.s) * nv.direction)
            gap = (nxt - nv.s) * nv.direction
            if gap > remaining:
                nv.s += nv.direction * remaining
                remaining = 0.0
                break
            nv.s = nxt
            remaining -= gap
            options = _valid_turns(grid, road, nv.direction, nxt)
            turn = planner.decide(nv.pair_id, nv.turn_cursor, options)
            nv.turn_cursor += 1
            nv.road, nv.direction, nv.s = _turn_outcome(grid, road, nv.direction, nxt, turn)
        # defensive: keep the on-lane invariant even if a stub segment is overrun
        road = grid.roads[nv.road]
        nv.s = min(max(nv.s, road.lo), road.hi)
        _sync_pose(nv, grid)
        out.append(nv)
    return out


@dataclass
class VUEPair:
    """A transmitter/receiver vehicle couple with its traffic parameters."""

    id: int
    tx: Vehicle
    rx: Vehicle
    arrival_rate: float   # packets/s, redrawn each window
    packet_bits: float

    @property
    def influx_bps(self) -> float:
        return self.arrival_rate * self.packet_bits


def spawn_pairs(grid: GridLayout, count: int, rng: np.random.Generator,
                speed_mps: float, gap_range: tuple[float, float] = (15.0, 20.0),
                arrival_range: tuple[float, float] = (5.0, 25.0),
                packet_bits: float = 12800.0) -> list[VUEPair]:
    """Place tx/rx couples on shared lanes, rx trailing tx by a safety gap.

    The initial gap segment never spans an intersection, so lazily drawn turn
    decisions stay aligned between the two vehicles of a pair.
    """
    pairs = []
    sizes = [VEHICLE_SIZE_CLASSES[i] for i in rng.integers(0, len(VEHICLE_SIZE_CLASSES),
                                                           size=2 * count)]
    for k in range(count):
        gap = rng.uniform(*gap_range)
        for _ in range(1000):
            road = grid.roads[rng.integers(0, len(grid.roads))]
            direction = 1 if rng.random() < 0.5 else -1
            lo, hi = road.lo, road.hi
            s_tx = rng.uniform(lo, hi)
            s_rx = s_tx - direction * gap
            if s_rx < lo or s_rx > hi:
                continue
            gap_lo, gap_hi = min(s_tx, s_rx), max(s_tx, s_rx)
            if any(gap_lo - 1e-6 <= c <= gap_hi + 1e-6 for c in road.crossings):
                continue
            break
        else:
            raise RuntimeError("could not place pair on the grid")
        ltx, wtx = sizes[2 * k]
        lrx, wrx = sizes[2 * k + 1]
        tx = _sync_pose(Vehicle(2 * k, k, road.index, direction, s_tx, speed_mps, ltx, wtx), grid)
        rx = _sync_pose(Vehicle(2 * k + 1, k, road.index, direction, s_rx, speed_mps, lrx, wrx), grid)
        rate = rng.uniform(*arrival_range)
        pairs.append(VUEPair(k, tx, rx, rate, packet_bits))
    return pairs


def on_lane(v: Vehicle, grid: GridLayout, tol: float = 1e-6) -> bool:
    """Check the Vehicle invariant: position sits on its lane at the lane offset."""
    road = grid.roads[v.road]
    half = grid.lane_width / 2.0
    if road.orientation == "v":
        lateral_ok = abs(v.position[0] - (road.center + v.direction * half)) < tol
        along_ok = road.lo - tol <= v.position[1] <= road.hi + tol
    else:
        lateral_ok = abs(v.position[1] - (road.center - v.direction * half)) < tol
        along_ok = road.lo - tol <= v.position[0] <= road.hi + tol
    return bool(lateral_ok and along_ok and v.speed >= 0)
