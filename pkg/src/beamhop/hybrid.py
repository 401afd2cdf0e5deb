"""Infrastructure-supported routing through a grid of base stations.

b = n^gamma base stations sit at the centers of a square-cell overlay
and are wired together with unlimited capacity. Traffic crosses the air
twice: access routing (source to its cell's BS) and exit routing (the
destination's BS to the destination), each a Manhattan relay walk over
an infra routing grid nested inside the BS cells. Access and exit never
share a slot; one line is served per BS cell per slot, round robin.

BS antennas behave exactly like node antennas and, in dense mode, use
the same reduced transmit power as the ad hoc nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RoutingInfeasible
from .geometry import CellGrid, GeometryMode, NetworkInstance, side_length, subregion_area
from .routing import Hop, select_relays
from .scheduling import ActiveTransmitterSet, _dedupe_by_region

ACCESS, EXIT = 0, 1


@dataclass(frozen=True)
class BsGrid:
    gamma: float
    b: int
    per_side: int
    side: float
    cell_side: float
    positions: np.ndarray  # (b, 2) cell centers

    def cell_of(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        col = np.clip(np.ceil(pts[..., 0] / self.cell_side).astype(np.int64) - 1,
                      0, self.per_side - 1)
        row = np.clip(np.ceil(pts[..., 1] / self.cell_side).astype(np.int64) - 1,
                      0, self.per_side - 1)
        return row * self.per_side + col


def place_bs(n: int, gamma: float, mode: GeometryMode = GeometryMode.DENSE) -> BsGrid:
    """Deploy round(n^gamma) base stations, snapped to a square grid."""
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"BS exponent gamma must lie in [0, 1), got {gamma}")
    per_side = max(1, round(math.sqrt(round(n ** gamma))))
    b = per_side * per_side
    side = side_length(n, mode)
    cell_side = side / per_side
    ij = np.arange(per_side)
    xs = (ij + 0.5) * cell_side
    gx, gy = np.meshgrid(xs, xs)
    positions = np.column_stack([gx.ravel(), gy.ravel()])
    return BsGrid(gamma=gamma, b=b, per_side=per_side, side=side,
                  cell_side=cell_side, positions=positions)


def infra_hop_distance(n: int, theta: float, alpha: float, gamma: float,
                       mode: GeometryMode = GeometryMode.DENSE) -> tuple[float, float]:
    """Per-hop distance and routing-cell area for the BS-assisted phases.

    Same elastic expression as the ad hoc case, but the cap is the BS
    cell size rather than the network edge: packets never fly farther
    than one BS cell. Returns (d_infra_hop, cell area).
    """
    if alpha <= 2.0:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha}")
    bs = place_bs(n, gamma, mode)
    log_n = math.log2(n)
    scale = 1.0 if mode is GeometryMode.DENSE else math.sqrt(n)
    raw = math.sqrt(log_n / n) * theta ** (-2.0 / alpha) * scale
    floor = math.sqrt(2.0 * log_n / n) * scale
    d = min(bs.cell_side, max(raw, floor))
    return d, d * d


@dataclass(frozen=True)
class InfraRoute:
    pair_id: int
    access: tuple[Hop, ...]
    exit: tuple[Hop, ...]

    @property
    def air_hops(self) -> int:
        return len(self.access) + len(self.exit)


def _infra_grid(inst: NetworkInstance, bs: BsGrid, d_infra: float) -> CellGrid:
    """Routing grid nested inside BS cells: k x k infra cells per BS cell."""
    k = max(1, math.floor(bs.cell_side / d_infra))
    cps = bs.per_side * k
    cell_side = inst.side / cps
    return CellGrid(side=inst.side, cells_per_side=cps,
                    cell_area=cell_side * cell_side, cell_side=cell_side,
                    subregion_area=subregion_area(inst.n, inst.mode))


def _leg(inst, grid, relays, start_node, start_pos, end_node, end_pos, cps):
    """Manhattan hop list between two endpoints over the infra grid."""
    (r0,), (c0,) = grid.cell_of(np.asarray(start_pos)[None, :])
    (r1,), (c1,) = grid.cell_of(np.asarray(end_pos)[None, :])
    step_c = 1 if c1 >= c0 else -1
    cols = np.arange(c0, c1 + step_c, step_c, dtype=np.int64)
    step_r = 1 if r1 >= r0 else -1
    rows = np.arange(r0, r1 + step_r, step_r, dtype=np.int64)
    cells = np.concatenate([r0 * cps + cols, rows[1:] * cps + c1])
    mid = cells[1:-1]
    if mid.size:
        relay_nodes = relays[mid]
        if np.any(relay_nodes < 0):
            empty = int(mid[relay_nodes < 0][0])
            raise RoutingInfeasible(f"infra routing cell {empty} holds no node")
        seq_nodes = [start_node] + [int(x) for x in relay_nodes] + [end_node]
        seq_pos = ([start_pos] + [tuple(inst.nodes[int(x)]) for x in relay_nodes]
                   + [end_pos])
    else:
        seq_nodes = [start_node, end_node]
        seq_pos = [start_pos, end_pos]
    hops = []
    for k in range(len(seq_nodes) - 1):
        pa, pb = seq_pos[k], seq_pos[k + 1]
        rc = int(cells[min(k + 1, len(cells) - 1)])
        hops.append(Hop(tx_node=seq_nodes[k], rx_node=seq_nodes[k + 1],
                        tx_pos=(float(pa[0]), float(pa[1])),
                        rx_pos=(float(pb[0]), float(pb[1])),
                        rx_cell=(rc // cps, rc % cps),
                        distance=float(math.hypot(pb[0] - pa[0], pb[1] - pa[1]))))
    return tuple(hops)


def build_infra_routes(inst: NetworkInstance, bs: BsGrid, d_infra: float,
                       single_hop: bool = False) -> tuple[list[InfraRoute], CellGrid]:
    """Access and exit legs for every pair, plus the infra routing grid.

    BSs appear as synthetic endpoints with ids n + bs_index. With
    ``single_hop`` each leg is one direct transmission to/from the BS.
    """
    grid = _infra_grid(inst, bs, d_infra)
    relays = select_relays(inst, grid)
    cps = grid.cells_per_side
    src_bs = bs.cell_of(inst.nodes[inst.sd_pairs[:, 0]])
    dst_bs = bs.cell_of(inst.nodes[inst.sd_pairs[:, 1]])
    routes = []
    for p, (src, dst) in enumerate(inst.sd_pairs):
        src, dst = int(src), int(dst)
        a_bs, e_bs = int(src_bs[p]), int(dst_bs[p])
        a_pos = tuple(bs.positions[a_bs])
        e_pos = tuple(bs.positions[e_bs])
        s_pos = tuple(inst.nodes[src])
        d_pos = tuple(inst.nodes[dst])
        if single_hop:
            (ar,), (ac,) = grid.cell_of(np.asarray(a_pos)[None, :])
            (dr,), (dc,) = grid.cell_of(np.asarray(d_pos)[None, :])
            access = (Hop(tx_node=src, rx_node=inst.n + a_bs, tx_pos=s_pos,
                          rx_pos=a_pos, rx_cell=(int(ar), int(ac)),
                          distance=float(math.hypot(a_pos[0] - s_pos[0],
                                                    a_pos[1] - s_pos[1]))),)
            exit_ = (Hop(tx_node=inst.n + e_bs, rx_node=dst, tx_pos=e_pos,
                         rx_pos=d_pos, rx_cell=(int(dr), int(dc)),
                         distance=float(math.hypot(d_pos[0] - e_pos[0],
                                                   d_pos[1] - e_pos[1]))),)
        else:
            access = _leg(inst, grid, relays, src, s_pos, inst.n + a_bs, a_pos, cps)
            exit_ = _leg(inst, grid, relays, inst.n + e_bs, e_pos, dst, d_pos, cps)
        routes.append(InfraRoute(pair_id=p, access=access, exit=exit_))
    return routes, grid


@dataclass(frozen=True)
class InfraRouteTable:
    """Flattened access+exit hops with round-robin service groups."""

    num_pairs: int
    pair: np.ndarray
    hop: np.ndarray
    phase: np.ndarray          # ACCESS or EXIT per hop
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
    access_groups: list[np.ndarray]  # pair ids per BS cell, sorted
    exit_groups: list[np.ndarray]
    access_slot_share: np.ndarray    # T_p^access / S per pair
    exit_slot_share: np.ndarray
    access_hops: np.ndarray          # hop counts per pair
    exit_hops: np.ndarray


def build_infra_table(inst: NetworkInstance, bs: BsGrid,
                      routes: list[InfraRoute], grid: CellGrid) -> InfraRouteTable:
    pair, hop, phase = [], [], []
    tx_node, rx_node, tx_pos, rx_pos, dist = [], [], [], [], []
    a_hops = np.zeros(len(routes), dtype=np.int64)
    e_hops = np.zeros(len(routes), dtype=np.int64)
    for rp in sorted(routes, key=lambda r: r.pair_id):
        for ph, leg in ((ACCESS, rp.access), (EXIT, rp.exit)):
            for k, h in enumerate(leg):
                pair.append(rp.pair_id)
                hop.append(k)
                phase.append(ph)
                tx_node.append(h.tx_node)
                rx_node.append(h.rx_node)
                tx_pos.append(h.tx_pos)
                rx_pos.append(h.rx_pos)
                dist.append(h.distance)
        a_hops[rp.pair_id] = len(rp.access)
        e_hops[rp.pair_id] = len(rp.exit)
    tx_pos = np.asarray(tx_pos, dtype=float).reshape(-1, 2)
    rx_pos = np.asarray(rx_pos, dtype=float).reshape(-1, 2)
    tx_az = np.arctan2(rx_pos[:, 1] - tx_pos[:, 1], rx_pos[:, 0] - tx_pos[:, 0])
    rx_az = tx_az + math.pi
    cps = grid.cells_per_side
    col = np.clip(np.ceil(tx_pos[:, 0] / grid.cell_side).astype(np.int64) - 1, 0, cps - 1)
    row = np.clip(np.ceil(tx_pos[:, 1] / grid.cell_side).astype(np.int64) - 1, 0, cps - 1)
    src_bs = bs.cell_of(inst.nodes[inst.sd_pairs[:, 0]])
    dst_bs = bs.cell_of(inst.nodes[inst.sd_pairs[:, 1]])
    access_groups = [np.flatnonzero(src_bs == c) for c in range(bs.b)]
    exit_groups = [np.flatnonzero(dst_bs == c) for c in range(bs.b)]
    a_share = np.zeros(len(routes))
    e_share = np.zeros(len(routes))
    for groups, share in ((access_groups, a_share), (exit_groups, e_share)):
        for g in groups:
            if len(g):
                share[g] = 0.5 / len(g)  # half the slots per phase, round robin
    return InfraRouteTable(
        num_pairs=len(routes),
        pair=np.asarray(pair, dtype=np.int64), hop=np.asarray(hop, dtype=np.int64),
        phase=np.asarray(phase, dtype=np.int8),
        tx_node=np.asarray(tx_node, dtype=np.int64),
        rx_node=np.asarray(rx_node, dtype=np.int64),
        tx_pos=tx_pos, rx_pos=rx_pos, tx_az=tx_az, rx_az=rx_az,
        distance=np.asarray(dist, dtype=float),
        region=row * cps + col,
        region_color=(3 * (row % 3) + (col % 3)).astype(np.int8),
        region_side=grid.cell_side, regions_per_side=cps,
        access_groups=access_groups, exit_groups=exit_groups,
        access_slot_share=a_share, exit_slot_share=e_share,
        access_hops=a_hops, exit_hops=e_hops)


def activate_infra(slot: int, table: InfraRouteTable) -> ActiveTransmitterSet:
    """One slot of infra routing: even slots access, odd slots exit.

    Every BS cell serves one line, cycling round robin through its
    sources (access) or destinations (exit). Color gating and region
    exclusion match the ad hoc scheduler.
    """
    phase = ACCESS if slot % 2 == 0 else EXIT
    turn = slot // 2
    groups = table.access_groups if phase == ACCESS else table.exit_groups
    served = [g[turn % len(g)] for g in groups if len(g)]
    pair_on = np.zeros(table.num_pairs, dtype=bool)
    pair_on[np.asarray(served, dtype=np.int64)] = True
    color = slot % 9
    cand = np.flatnonzero(pair_on[table.pair]
                          & (table.phase == phase)
                          & (table.region_color == color))
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
