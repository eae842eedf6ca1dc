"""Reference scheme: fixed equal-size geographic zones with load-ranked exclusive RBs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import hare_niemeyer
from .clustering import ZonePartition
from .scenario import GridLayout


def fixed_zone_partition(grid: GridLayout, zone_count: int,
                         positions: np.ndarray) -> ZonePartition:
    """Tile the grid into equal-width vertical strips; assign pairs by tx position.

    Points exactly on a strip boundary go to the lower-index strip; empty
    strips are dropped.
    """
    if zone_count < 1:
        raise ValueError("zone_count must be at least 1")
    pos = np.asarray(positions, dtype=float)
    width = grid.bounds[0]
    inner_edges = np.array([width * i / zone_count for i in range(1, zone_count)])
    tiles = np.sum(pos[:, 0:1] > inner_edges[None, :], axis=1).astype(int)
    return ZonePartition.from_labels(tiles)


@dataclass
class BaselineAllocation:
    assign: np.ndarray        # (K,) global RB id, -1 = unserved
    pool_sizes: list[int]
    served: int


def baseline_allocate(partition: ZonePartition, pair_loads: np.ndarray,
                      n_rbs: int) -> BaselineAllocation:
    """Apportion pool sizes per tile by load, then serve pairs exclusively.

    Every tile's pool is anchored at RB 0 so the spectrum is spatially reused
    across tiles; within a tile each RB carries at most one pair, assigned in
    descending load order, and pairs beyond the pool size stay unserved.
    """
    loads = np.asarray(pair_loads, dtype=float)
    assign = np.full(len(loads), -1, dtype=int)
    tile_loads = [float(np.sum(loads[z])) for z in partition.zones]
    sizes = hare_niemeyer(tile_loads, n_rbs)
    for zone, size in zip(partition.zones, sizes):
        ranked = sorted(zone.tolist(), key=lambda k: (-loads[k], k))
        for slot, k in enumerate(ranked[:size]):
            assign[k] = slot
    return BaselineAllocation(assign, sizes, int(np.sum(assign >= 0)))
