"""Slot scheduling, 9-phase TDMA coloring, and per-slot activation.

Each slot activates a uniform random subset of M SD pairs. Space is
shared through a 3x3 cell coloring: slot s carries color s mod 9, and a
hop of an active pair fires exactly when the color of its transmitter's
cell matches the slot color. Hops of one pair that share a color sit at
least three cells apart along the path, which is what lets a pair keep
several hops in flight at once. At most one transmitter may occupy a
colored region per slot; collisions keep the lowest (pair, hop).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .antenna import Boresight
from .geometry import CellGrid, _tiling
from .routing import RoutePlan

NUM_COLORS = 9
_CHUNK = 16384  # fixed chunk size; part of the schedule's stream definition


@dataclass(frozen=True)
class SlotSchedule:
    """Activation sets and per-pair tallies for a run of num_slots slots.

    ``active_sets`` holds the first ``kept_slots`` slots as sorted rows
    of pair ids; tallies always cover the full horizon. ``clamped``
    records that the requested M exceeded the pair count and was cut.
    """

    n: int
    num_pairs: int
    m: int
    num_slots: int
    seed: int
    tallies: np.ndarray
    active_sets: np.ndarray
    kept_slots: int
    clamped: bool = False

    def color(self, slot: int) -> int:
        return slot % NUM_COLORS

    def active_pairs(self, slot: int) -> np.ndarray:
        if slot >= self.kept_slots:
            raise IndexError(
                f"slot {slot} beyond the {self.kept_slots} stored activation sets")
        return self.active_sets[slot]


def draw_schedule(n: int, m: int, num_slots: int, seed,
                  keep_sets: int | None = None) -> SlotSchedule:
    """Draw a uniform random M-subset of pairs for each slot.

    Subsets are sampled with a chunked, vectorized variant of Floyd's
    algorithm, so cost scales with M rather than the pair count. The
    draw order is fixed by the chunk layout, making schedules
    reproducible for a given (n, m, num_slots, seed).
    """
    if num_slots < 1:
        raise ValueError(f"num_slots must be >= 1, got {num_slots}")
    pairs = n // 2
    clamped = False
    if m > pairs:
        clamped = True
        m = pairs
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    keep = num_slots if keep_sets is None else min(keep_sets, num_slots)
    rng = np.random.default_rng(seed)
    tallies = np.zeros(pairs, dtype=np.int64)
    kept = np.empty((keep, m), dtype=np.int32)
    if m == pairs:
        tallies[:] = num_slots
        kept[:] = np.arange(pairs, dtype=np.int32)
        return SlotSchedule(n=n, num_pairs=pairs, m=m, num_slots=num_slots,
                            seed=_seed_repr(seed), tallies=tallies,
                            active_sets=kept, kept_slots=keep, clamped=clamped)
    done = 0
    while done < num_slots:
        b = min(_CHUNK, num_slots - done)
        chosen = np.zeros((b, pairs), dtype=bool)
        picks = np.empty((b, m), dtype=np.int32)
        rows = np.arange(b)
        for k, j in enumerate(range(pairs - m, pairs)):
            t = rng.integers(0, j + 1, size=b)
            hit = chosen[rows, t]
            pick = np.where(hit, j, t)
            chosen[rows, pick] = True
            picks[:, k] = pick
        tallies += np.bincount(picks.ravel(), minlength=pairs)
        if done < keep:
            take = min(b, keep - done)
            kept[done:done + take] = np.sort(picks[:take], axis=1)
        done += b
    return SlotSchedule(n=n, num_pairs=pairs, m=m, num_slots=num_slots,
                        seed=_seed_repr(seed), tallies=tallies,
                        active_sets=kept, kept_slots=keep, clamped=clamped)


def _seed_repr(seed) -> int:
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    return hash(tuple(seed)) & 0x7FFFFFFF


@dataclass(frozen=True)
class RouteTable:
    """All routes flattened into per-hop arrays for fast activation.

    ``region`` and ``region_color`` refer to the TDMA coloring grid,
    which is the routing-cell grid by default or the finer occupancy
    tessellation when ``tdma_grid='subregion'``.
    """

    num_pairs: int
    pair: np.ndarray
    hop: np.ndarray
    tx_node: np.ndarray
    rx_node: np.ndarray
    tx_pos: np.ndarray
    rx_pos: np.ndarray
    tx_az: np.ndarray
    rx_az: np.ndarray
    distance: np.ndarray
    region: np.ndarray
    region_color: np.ndarray
    region_side: float
    regions_per_side: int
    hops_per_pair: np.ndarray
    tdma_grid: str = "routing"

    @property
    def num_hops(self) -> int:
        return len(self.pair)


def build_route_table(routes: list[RoutePlan], grid: CellGrid,
                      tdma_grid: str = "routing") -> RouteTable:
    """Flatten RoutePlans and attach coloring-region ids per transmitter."""
    if tdma_grid not in ("routing", "subregion"):
        raise ValueError(f"tdma_grid must be 'routing' or 'subregion', got {tdma_grid}")
    pair, hop = [], []
    tx_node, rx_node, tx_pos, rx_pos, dist = [], [], [], [], []
    hops_per_pair = np.zeros(len(routes), dtype=np.int64)
    for rp in sorted(routes, key=lambda r: r.pair_id):
        hops_per_pair[rp.pair_id] = rp.hop_count
        for k, h in enumerate(rp.hops):
            pair.append(rp.pair_id)
            hop.append(k)
            tx_node.append(h.tx_node)
            rx_node.append(h.rx_node)
            tx_pos.append(h.tx_pos)
            rx_pos.append(h.rx_pos)
            dist.append(h.distance)
    tx_pos = np.asarray(tx_pos, dtype=float).reshape(-1, 2)
    rx_pos = np.asarray(rx_pos, dtype=float).reshape(-1, 2)
    tx_az = np.arctan2(rx_pos[:, 1] - tx_pos[:, 1], rx_pos[:, 0] - tx_pos[:, 0])
    rx_az = tx_az + math.pi
    if tdma_grid == "routing":
        rps, rside = grid.cells_per_side, grid.cell_side
    else:
        rps, rside, _ = _tiling(grid.side, grid.subregion_area)
    col = np.clip(np.ceil(tx_pos[:, 0] / rside).astype(np.int64) - 1, 0, rps - 1)
    row = np.clip(np.ceil(tx_pos[:, 1] / rside).astype(np.int64) - 1, 0, rps - 1)
    region = row * rps + col
    color = (3 * (row % 3) + (col % 3)).astype(np.int8)
    return RouteTable(num_pairs=len(routes),
                      pair=np.asarray(pair, dtype=np.int64),
                      hop=np.asarray(hop, dtype=np.int64),
                      tx_node=np.asarray(tx_node, dtype=np.int64),
                      rx_node=np.asarray(rx_node, dtype=np.int64),
                      tx_pos=tx_pos, rx_pos=rx_pos, tx_az=tx_az, rx_az=rx_az,
                      distance=np.asarray(dist, dtype=float),
                      region=region, region_color=color,
                      region_side=rside, regions_per_side=rps,
                      hops_per_pair=hops_per_pair, tdma_grid=tdma_grid)


@dataclass(frozen=True)
class ActiveTransmitterSet:
    """The transmitters firing in one slot, as parallel arrays.

    ``table_index`` holds each entry's row in the originating route
    table, which is how per-hop statistics are accumulated across slots.
    """

    slot: int
    color: int
    pair: np.ndarray
    hop: np.ndarray
    tx_node: np.ndarray
    rx_node: np.ndarray
    tx_pos: np.ndarray
    rx_pos: np.ndarray
    tx_az: np.ndarray
    rx_az: np.ndarray
    distance: np.ndarray
    region: np.ndarray
    region_side: float
    regions_per_side: int
    table_index: np.ndarray

    def __len__(self) -> int:
        return len(self.pair)

    @property
    def transmitters(self) -> list[tuple]:
        """(pair, hop, tx node, rx node, (tx boresight, rx boresight)) tuples."""
        return [(int(self.pair[i]), int(self.hop[i]),
                 int(self.tx_node[i]), int(self.rx_node[i]),
                 (Boresight(azimuth=float(self.tx_az[i]), node=int(self.tx_node[i])),
                  Boresight(azimuth=float(self.rx_az[i]), node=int(self.rx_node[i]))))
                for i in range(len(self.pair))]


def _dedupe_by_region(region: np.ndarray, cand: np.ndarray) -> np.ndarray:
    """Keep the first candidate (in given order) per region."""
    order = np.argsort(region[cand], kind="stable")
    srt = cand[order]
    reg = region[srt]
    first = np.ones(len(srt), dtype=bool)
    first[1:] = reg[1:] != reg[:-1]
    keep = srt[first]
    keep.sort()
    return keep


def activate(slot: int, schedule: SlotSchedule, table: RouteTable) -> ActiveTransmitterSet:
    """Resolve which hops transmit in one slot.

    A hop fires when its pair is scheduled and its transmitter's region
    color equals the slot color; then each colored region keeps only its
    lowest (pair, hop) candidate.
    """
    color = schedule.color(slot)
    active = schedule.active_pairs(slot)
    pair_on = np.zeros(schedule.num_pairs, dtype=bool)
    pair_on[active] = True
    cand = np.flatnonzero(pair_on[table.pair] & (table.region_color == color))
    keep = _dedupe_by_region(table.region, cand)
    return ActiveTransmitterSet(
        slot=slot, color=color,
        pair=table.pair[keep], hop=table.hop[keep],
        tx_node=table.tx_node[keep], rx_node=table.rx_node[keep],
        tx_pos=table.tx_pos[keep], rx_pos=table.rx_pos[keep],
        tx_az=table.tx_az[keep], rx_az=table.rx_az[keep],
        distance=table.distance[keep], region=table.region[keep],
        region_side=table.region_side, regions_per_side=table.regions_per_side,
        table_index=keep)
