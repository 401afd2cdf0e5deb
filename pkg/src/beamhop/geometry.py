"""Random network instances and the square tessellations built on them.

Nodes are dropped uniformly on a square: unit area in dense mode, area n
in extended mode. The n nodes are matched into n/2 source-destination
pairs. Two tilings of the square are used downstream: coarse routing
cells whose size tracks the per-hop distance, and fine occupancy regions
of area 2*log2(n)/n (dense; scaled by n in extended mode) that each hold
at least one node with high probability.

All logarithms in sizing formulas are base two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


class GeometryMode(enum.Enum):
    DENSE = "dense"
    EXTENDED = "extended"


def side_length(n: int, mode: GeometryMode) -> float:
    """Edge length of the network square."""
    return 1.0 if mode is GeometryMode.DENSE else math.sqrt(n)


def subregion_area(n: int, mode: GeometryMode) -> float:
    """Area of one occupancy region: 2*log2(n)/n, times n in extended mode."""
    a = 2.0 * math.log2(n) / n
    if mode is GeometryMode.EXTENDED:
        a *= n
    return a


@dataclass(frozen=True)
class NetworkInstance:
    """An immutable snapshot of node positions and the SD pairing.

    ``nodes`` is an (n, 2) array of positions inside the square and
    ``sd_pairs`` an (n/2, 2) integer array forming a perfect matching on
    node ids 0..n-1.
    """

    n: int
    mode: GeometryMode
    side: float
    nodes: np.ndarray
    sd_pairs: np.ndarray
    seed: int

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.sd_pairs.flags.writeable = False


def place_nodes(n: int, mode: GeometryMode, seed: int) -> NetworkInstance:
    """Drop n nodes uniformly on the square and pair them at random.

    The pairing is a uniformly random perfect matching: shuffle the node
    ids and pair adjacent entries. Unit-square coordinates are drawn
    first and scaled by the side length, so dense and extended instances
    with the same seed coincide up to a sqrt(n) scaling.
    """
    if n < 4 or n % 2 != 0:
        raise ValueError(f"node count must be even and >= 4, got {n}")
    rng = np.random.default_rng(seed)
    side = side_length(n, mode)
    unit = rng.random((n, 2))
    nodes = unit * side
    perm = rng.permutation(n)
    sd_pairs = perm.reshape(n // 2, 2).copy()
    return NetworkInstance(n=n, mode=mode, side=side, nodes=nodes,
                           sd_pairs=sd_pairs, seed=seed)


@dataclass(frozen=True)
class CellGrid:
    """A square tiling of the network area into cells_per_side^2 cells.

    ``cell_area`` is the effective per-cell area after rounding the
    requested area to an exact integer tiling. Points exactly on a cell
    edge belong to the lower-indexed cell.
    """

    side: float
    cells_per_side: int
    cell_area: float
    cell_side: float
    subregion_area: float

    def cell_of(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map (..., 2) positions to (row, col) indices."""
        pts = np.asarray(points, dtype=float)
        col = np.clip(np.ceil(pts[..., 0] / self.cell_side).astype(np.int64) - 1,
                      0, self.cells_per_side - 1)
        row = np.clip(np.ceil(pts[..., 1] / self.cell_side).astype(np.int64) - 1,
                      0, self.cells_per_side - 1)
        return row, col

    def cell_id(self, points: np.ndarray) -> np.ndarray:
        row, col = self.cell_of(points)
        return row * self.cells_per_side + col

    def cell_center(self, row: np.ndarray, col: np.ndarray) -> np.ndarray:
        return np.stack([(np.asarray(col) + 0.5) * self.cell_side,
                         (np.asarray(row) + 0.5) * self.cell_side], axis=-1)

    @property
    def num_cells(self) -> int:
        return self.cells_per_side ** 2


def _tiling(side: float, requested_area: float) -> tuple[int, float, float]:
    """Round an area request to an exact tiling: count, cell side, area."""
    cps = max(1, math.floor(side / math.sqrt(requested_area)))
    cell_side = side / cps
    return cps, cell_side, cell_side * cell_side


def build_cell_grid(inst: NetworkInstance, cell_area: float) -> CellGrid:
    """Tile the instance's square into routing cells of ~cell_area each.

    The requested area must not fall below the occupancy-region area for
    the instance, or cells could end up empty and routing would stall.
    Rounding only ever enlarges cells, never shrinks them.
    """
    sub = subregion_area(inst.n, inst.mode)
    if not (0.0 < cell_area <= inst.side ** 2 * (1 + 1e-12)):
        raise ConfigError(f"cell_area {cell_area} outside (0, side^2]")
    if cell_area < sub * (1.0 - 1e-9):
        raise ConfigError(
            f"cell_area {cell_area:.6g} below occupancy-region area {sub:.6g}; "
            "cells would not be reliably occupied")
    cps, cell_side, eff = _tiling(inst.side, cell_area)
    return CellGrid(side=inst.side, cells_per_side=cps, cell_area=eff,
                    cell_side=cell_side, subregion_area=sub)


def occupancy_check(inst: NetworkInstance, grid: CellGrid) -> bool:
    """True iff every occupancy region of the instance holds >= 1 node."""
    sub_cps, sub_side, _ = _tiling(inst.side, grid.subregion_area)
    col = np.clip(np.ceil(inst.nodes[:, 0] / sub_side).astype(np.int64) - 1,
                  0, sub_cps - 1)
    row = np.clip(np.ceil(inst.nodes[:, 1] / sub_side).astype(np.int64) - 1,
                  0, sub_cps - 1)
    counts = np.bincount(row * sub_cps + col, minlength=sub_cps * sub_cps)
    return bool(counts.min() >= 1)
