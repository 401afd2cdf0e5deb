"""Hop-distance sizing, operating-regime classification, and route building.

The per-hop distance stretches with the inverse beam width: a narrower
beam concentrates more gain on the link, so hops can reach farther while
the receiver SINR stays at the same level. In the dense network

    d_hop = min(1, max(sqrt(log2(n)/n) * theta^(-2/alpha),
                       sqrt(2*log2(n)/n)))

The lower clamp keeps routing cells at least as large as the occupancy
regions (wide beams fall back to nearest-neighbor-scale hops); the upper
clamp is the network edge, where transmission collapses to a single hop.
Extended networks use the same expression scaled by sqrt(n).

Routes run along each pair's source-destination line as a Manhattan
walk over routing cells, horizontal first, with one relay per
intermediate cell (the node nearest the cell center).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import RoutingInfeasible
from .geometry import CellGrid, GeometryMode, NetworkInstance

DEFAULT_POWER = 10.0
DEFAULT_RHO = 0.9


class Regime(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"


@dataclass(frozen=True)
class RegimeLabel:
    regime: Regime
    sharpness: float            # theta^-1
    single_hop_threshold: float  # (n / log2 n)^(alpha/4)
    infra_threshold: float | None  # b^(alpha/2) * (log2 n / n)^(alpha/4)
    exponent: float             # predicted scaling exponent of T(n)


def predicted_exponent(beta_theta: float, alpha: float, gamma: float = 0.0) -> float:
    """Predicted growth exponent of aggregate throughput in n.

    With theta shrinking like n^-beta and b = n^gamma base stations the
    exponent is min(max(1/2 + (2/alpha)*beta, gamma), 1).
    """
    return min(max(0.5 + (2.0 / alpha) * beta_theta, gamma), 1.0)


def classify_regime(n: int, theta: float, alpha: float,
                    b: int | None = None, gamma: float | None = None) -> RegimeLabel:
    """Assign the operating regime for (n, theta, alpha) and optional BSs.

    Ad hoc: regime II iff theta^-1 >= (n/log2 n)^(alpha/4), else I. The
    boundary point itself is single-hop. With b base stations: regime III
    while theta^-1 stays below b^(alpha/2)*(log2 n/n)^(alpha/4), regime V
    past the single-hop threshold, IV between.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    if not (0.0 < theta):
        raise ValueError(f"theta must be positive, got {theta}")
    if alpha <= 2.0:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha}")
    log_n = math.log2(n)
    sharp = 1.0 / theta
    hop_thr = (n / log_n) ** (alpha / 4.0)
    beta = max(0.0, -math.log2(theta) / log_n)
    gam = 0.0
    infra_thr = None
    if b is not None:
        if gamma is None:
            gamma = math.log(b, n) if b > 1 else 0.0
        if not (0.0 <= gamma < 1.0):
            raise ValueError(f"BS exponent gamma must lie in [0, 1), got {gamma}")
        gam = gamma
        infra_thr = b ** (alpha / 2.0) * (log_n / n) ** (alpha / 4.0)
        if sharp < infra_thr:
            regime = Regime.III
        elif sharp >= hop_thr:
            regime = Regime.V
        else:
            regime = Regime.IV
    else:
        regime = Regime.II if sharp >= hop_thr else Regime.I
    return RegimeLabel(regime=regime, sharpness=sharp,
                       single_hop_threshold=hop_thr, infra_threshold=infra_thr,
                       exponent=predicted_exponent(beta, alpha, gam))


@dataclass(frozen=True)
class ElasticParams:
    """Derived routing parameters for one (n, theta, alpha, mode) point."""

    n: int
    mode: GeometryMode
    theta: float
    alpha: float
    d_hop: float
    cell_area: float
    h_bar: float        # planned average hop count, side / d_hop
    tx_power: float     # per-node transmit power
    power: float        # power budget P
    regime: RegimeLabel


def hop_distance(n: int, theta: float, alpha: float, mode: GeometryMode) -> float:
    """The clamped per-hop distance for the given operating point."""
    log_n = math.log2(n)
    scale = 1.0 if mode is GeometryMode.DENSE else math.sqrt(n)
    raw = math.sqrt(log_n / n) * theta ** (-2.0 / alpha) * scale
    floor = math.sqrt(2.0 * log_n / n) * scale
    side = scale  # 1 dense, sqrt(n) extended
    return min(side, max(raw, floor))


def elastic_params(n: int, theta: float, alpha: float, mode: GeometryMode,
                   power: float = DEFAULT_POWER, rho: float = DEFAULT_RHO) -> ElasticParams:
    """Resolve the hop distance, cell area, and transmit power scaling.

    Dense nodes transmit at P*(log2(n)/n)^(alpha/2); extended nodes use
    the full power budget P.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    if not (0.0 < theta <= 2.0 * math.pi):
        raise ValueError(f"theta must lie in (0, 2*pi], got {theta}")
    if alpha <= 2.0:
        raise ValueError(f"path-loss exponent must exceed 2, got {alpha}")
    d = hop_distance(n, theta, alpha, mode)
    side = 1.0 if mode is GeometryMode.DENSE else math.sqrt(n)
    if mode is GeometryMode.DENSE:
        tx_power = power * (math.log2(n) / n) ** (alpha / 2.0)
    else:
        tx_power = power
    return ElasticParams(n=n, mode=mode, theta=theta, alpha=alpha,
                         d_hop=d, cell_area=d * d, h_bar=max(1.0, side / d),
                         tx_power=tx_power, power=power,
                         regime=classify_regime(n, theta, alpha))


def pairs_per_slot(params: ElasticParams) -> int:
    """Number of SD pairs activated together: n*d_hop/(side*log2 n), clamped."""
    n = params.n
    side = 1.0 if params.mode is GeometryMode.DENSE else math.sqrt(n)
    m = round(n * params.d_hop / (side * math.log2(n)))
    return int(min(max(m, 1), n // 2))


@dataclass(frozen=True)
class Hop:
    tx_node: int
    rx_node: int
    tx_pos: tuple[float, float]
    rx_pos: tuple[float, float]
    rx_cell: tuple[int, int]
    distance: float


@dataclass(frozen=True)
class RoutePlan:
    pair_id: int
    hops: tuple[Hop, ...]

    @property
    def hop_count(self) -> int:
        return len(self.hops)


def select_relays(inst: NetworkInstance, grid: CellGrid) -> np.ndarray:
    """Pick one relay per routing cell: nearest the center, ties by id.

    Returns an array of length cells_per_side^2 holding a node id per
    cell, -1 where the cell is empty.
    """
    row, col = grid.cell_of(inst.nodes)
    cell = row * grid.cells_per_side + col
    centers = grid.cell_center(row, col)
    d2 = np.sum((inst.nodes - centers) ** 2, axis=1)
    ids = np.arange(inst.n)
    order = np.lexsort((ids, d2, cell))
    cells_sorted = cell[order]
    first = np.ones(inst.n, dtype=bool)
    first[1:] = cells_sorted[1:] != cells_sorted[:-1]
    relay = np.full(grid.num_cells, -1, dtype=np.int64)
    relay[cells_sorted[first]] = order[first]
    return relay


def _cell_path(r0: int, c0: int, r1: int, c1: int, cps: int) -> np.ndarray:
    """Cell-id sequence from (r0,c0) to (r1,c1): horizontal leg, then vertical."""
    step_c = 1 if c1 >= c0 else -1
    cols = np.arange(c0, c1 + step_c, step_c, dtype=np.int64)
    step_r = 1 if r1 >= r0 else -1
    rows = np.arange(r0, r1 + step_r, step_r, dtype=np.int64)
    horiz = r0 * cps + cols
    vert = rows[1:] * cps + c1
    return np.concatenate([horiz, vert])


def build_route(pair_idx: int, inst: NetworkInstance, grid: CellGrid,
                relays: np.ndarray | None = None) -> RoutePlan:
    """Construct the multihop route of one SD pair over the cell grid.

    The packet walks the pair's SD line cell by cell, horizontal steps
    first, relayed once per intermediate cell; the final hop lands on
    the destination node itself. Raises RoutingInfeasible if any
    intermediate cell is empty (the caller may retry with a new seed).
    """
    if relays is None:
        relays = select_relays(inst, grid)
    src, dst = (int(x) for x in inst.sd_pairs[pair_idx])
    cps = grid.cells_per_side
    (r0,), (c0,) = grid.cell_of(inst.nodes[src][None, :])
    (r1,), (c1,) = grid.cell_of(inst.nodes[dst][None, :])
    cells = _cell_path(int(r0), int(c0), int(r1), int(c1), cps)
    mid = cells[1:-1]
    if mid.size:
        relay_nodes = relays[mid]
        if np.any(relay_nodes < 0):
            empty = mid[relay_nodes < 0][0]
            raise RoutingInfeasible(
                f"pair {pair_idx}: routing cell {int(empty)} holds no node")
        node_seq = np.concatenate([[src], relay_nodes, [dst]])
    else:
        node_seq = np.array([src, dst], dtype=np.int64)
    hops = []
    for k in range(len(node_seq) - 1):
        a, b = int(node_seq[k]), int(node_seq[k + 1])
        pa, pb = inst.nodes[a], inst.nodes[b]
        rc = cells[min(k + 1, len(cells) - 1)]
        hops.append(Hop(tx_node=a, rx_node=b,
                        tx_pos=(float(pa[0]), float(pa[1])),
                        rx_pos=(float(pb[0]), float(pb[1])),
                        rx_cell=(int(rc) // cps, int(rc) % cps),
                        distance=float(np.hypot(pb[0] - pa[0], pb[1] - pa[1]))))
    return RoutePlan(pair_id=pair_idx, hops=tuple(hops))


def build_all_routes(inst: NetworkInstance, grid: CellGrid) -> list[RoutePlan]:
    """Routes for every SD pair, sharing one relay table."""
    relays = select_relays(inst, grid)
    return [build_route(p, inst, grid, relays)
            for p in range(len(inst.sd_pairs))]
