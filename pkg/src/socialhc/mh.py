"""Multihop routing over square cells with t-TDMA.

The square is cut into ``g x g`` cells (``g = floor(L / sqrt(a))``, so the
actual cell side ``L / g`` is at least ``sqrt(a)``). A packet follows the
staircase of cells crossed by the source-destination segment, one hop per
cell boundary. Each cell relays through the node nearest its centre.

Rates: with reuse factor ``t = k**2`` the cells sharing ``(col % k,
row % k)`` transmit together. A hop's SINR counts every other cell of the
transmitting class as an interferer (its relay sending at power ``P``).
The rate ``R_c`` of cell ``c`` is its worst relay-to-relay hop towards an
edge neighbour and the network cell rate ``R`` is the mean of ``R_c``
over cells carrying traffic. The busiest cell serves its ``max_load``
paths during a ``1/t`` share of the time, which gives the per-pair rate
``R / (t * max_load)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EmptyCellError
from .geometry import Deployment
from .social import SocialAssignment


@dataclass(frozen=True)
class CellGrid:
    cell_area: float
    cells_per_side: int
    cell_side: float
    positions: np.ndarray = field(repr=False)
    node_cells: np.ndarray = field(repr=False)
    cell_nodes: tuple = field(repr=False)
    relays: np.ndarray = field(repr=False)

    @property
    def g(self) -> int:
        return self.cells_per_side

    def cell_of(self, node: int) -> tuple[int, int]:
        c, r = self.node_cells[node]
        return int(c), int(r)

    def nodes_in(self, cell) -> np.ndarray:
        c, r = cell
        return self.cell_nodes[c * self.g + r]

    def relay_position(self, cell) -> np.ndarray:
        return self.positions[self.relays[cell[0], cell[1]]]


@dataclass(frozen=True)
class RoutingPath:
    pair: tuple[int, int]
    cells: tuple
    hop_count: int


@dataclass(frozen=True)
class CellLoad:
    loads: np.ndarray = field(repr=False)
    max_load: int
    mean_load: float

    @property
    def per_cell(self) -> dict:
        return {(int(c), int(r)): int(self.loads[c, r]) for c, r in np.argwhere(self.loads)}


@dataclass(frozen=True)
class MhResult:
    aggregate_throughput: float
    mean_delay_hops: float
    max_cell_load: int
    per_cell_loads: dict = field(repr=False)
    n_pairs: int = 0
    bottleneck_rate: float = 0.0
    cell_rate: float = 0.0
    min_cell_rate: float = 0.0
    tdma_slots: int = 1
    hop_counts: np.ndarray = field(default=None, repr=False)


def build_cells(d: Deployment, cell_area: float, min_area_factor: float | None = None,
                allow_empty: bool = False) -> CellGrid:
    """Split the square into routing cells and pick one relay per cell.

    ``min_area_factor`` ``c`` enforces ``a >= c * L**2 * log(n) / n``
    (``c log n / n`` dense, ``c log n`` extended).
    """
    L = d.side_length
    if not (0 < cell_area <= L * L * (1 + 1e-12)):
        raise ConfigurationError(f"cell area must be in (0, L^2], got {cell_area}")
    if min_area_factor is not None:
        floor_area = min_area_factor * L * L * math.log(d.n) / d.n
        if cell_area < floor_area:
            raise ConfigurationError(
                f"cell area {cell_area:g} below {min_area_factor} L^2 log(n)/n = {floor_area:g}")
    g = max(1, int(math.floor(L / math.sqrt(cell_area) + 1e-9)))
    side = L / g
    idx = np.minimum((d.positions // side).astype(np.int64), g - 1)
    flat = idx[:, 0] * g + idx[:, 1]
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=g * g)
    if not allow_empty and np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        raise EmptyCellError(divmod(empty, g))
    bounds = np.concatenate([[0], np.cumsum(counts)])
    cell_nodes = tuple(order[bounds[k]:bounds[k + 1]] for k in range(g * g))
    centers = (idx + 0.5) * side
    off = np.hypot(*(d.positions - centers).T)
    relays = np.full((g, g), -1, dtype=np.int64)
    for k, members in enumerate(cell_nodes):
        if members.size:
            relays[k // g, k % g] = members[np.argmin(off[members])]
    return CellGrid(cell_area, g, side, d.positions, idx, cell_nodes, relays)


def route(grid: CellGrid, s: int, v: int) -> RoutingPath:
    """Cells visited by the segment from ``s`` to ``v``, one edge-step at a time.

    Exact corner crossings step horizontally first.
    """
    side = grid.cell_side
    p0 = grid.positions[s] / side
    p1 = grid.positions[v] / side
    cx, cy = grid.cell_of(s)
    tx, ty = grid.cell_of(v)
    cells = [(cx, cy)]
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    sx = (tx > cx) - (tx < cx)
    sy = (ty > cy) - (ty < cy)
    if dx != 0.0:
        bx = cx + 1 if dx > 0 else cx
        t_x, dt_x = (bx - p0[0]) / dx, 1.0 / abs(dx)
    else:
        t_x = dt_x = math.inf
    if dy != 0.0:
        by = cy + 1 if dy > 0 else cy
        t_y, dt_y = (by - p0[1]) / dy, 1.0 / abs(dy)
    else:
        t_y = dt_y = math.inf
    while cx != tx or cy != ty:
        if cy == ty or (cx != tx and t_x <= t_y):
            cx += sx
            t_x += dt_x
        else:
            cy += sy
            t_y += dt_y
        cells.append((cx, cy))
    hops = len(cells) - 1 if len(cells) > 1 else 1
    return RoutingPath((int(s), int(v)), tuple(cells), hops)


def cell_load(grid: CellGrid, paths) -> CellLoad:
    loads = np.zeros((grid.g, grid.g), dtype=np.int64)
    for path in paths:
        for c, r in path.cells:
            loads[c, r] += 1
    return CellLoad(loads, int(loads.max(initial=0)), float(loads.mean()))


def _reuse_side(tdma_t: int) -> int:
    k = math.isqrt(int(tdma_t))
    if tdma_t < 1 or k * k != tdma_t:
        raise ConfigurationError(f"TDMA reuse factor must be a perfect square, got {tdma_t}")
    return k


def hop_rates(grid: CellGrid, tx_pos, rx_pos, tx_cells, rx_cells, power: float,
              alpha: float, tdma_t: int = 9) -> np.ndarray:
    """Shannon rate ``log2(1 + SINR)`` of each hop under the reuse pattern.

    Interferers are the relays of every cell in the transmitting cell's
    reuse class other than the transmitting and receiving cells.
    """
    k = _reuse_side(tdma_t)
    g = grid.g
    tx_pos = np.asarray(tx_pos, float).reshape(-1, 2)
    rx_pos = np.asarray(rx_pos, float).reshape(-1, 2)
    tx_cells = np.asarray(tx_cells, np.int64).reshape(-1, 2)
    rx_cells = np.asarray(rx_cells, np.int64).reshape(-1, 2)
    sig_d2 = np.sum((tx_pos - rx_pos) ** 2, axis=1)
    signal = power * sig_d2 ** (-alpha / 2)
    interference = np.zeros(len(tx_pos))
    cols, rows = np.meshgrid(np.arange(g), np.arange(g), indexing="ij")
    hop_class = (tx_cells[:, 0] % k) * k + tx_cells[:, 1] % k
    for cls in np.unique(hop_class):
        members = np.flatnonzero(hop_class == cls)
        sel = ((cols % k) * k + rows % k) == cls
        icells = np.stack([cols[sel], rows[sel]], axis=1)
        ipos = grid.positions[grid.relays[icells[:, 0], icells[:, 1]]]
        d2 = np.sum((rx_pos[members, None, :] - ipos[None, :, :]) ** 2, axis=2)
        own = (np.all(icells[None] == tx_cells[members, None], axis=2)
               | np.all(icells[None] == rx_cells[members, None], axis=2))
        with np.errstate(divide="ignore"):
            contrib = np.where(own, 0.0, power * d2 ** (-alpha / 2))
        interference[members] = contrib.sum(axis=1)
    return np.log2(1.0 + signal / (1.0 + interference))


def relay_cell_rates(grid: CellGrid, power: float, alpha: float, tdma_t: int = 9) -> np.ndarray:
    """Per-cell rate: the worst relay-to-relay hop towards an edge neighbour.

    ``inf`` for a lone cell (no neighbour exists).
    """
    g = grid.g
    tx_cells, rx_cells = [], []
    for c in range(g):
        for r in range(g):
            for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if 0 <= c + dc < g and 0 <= r + dr < g:
                    tx_cells.append((c, r))
                    rx_cells.append((c + dc, r + dr))
    rate = np.full((g, g), np.inf)
    if not tx_cells:
        return rate
    tx_cells = np.array(tx_cells)
    rx_cells = np.array(rx_cells)
    pos = grid.positions
    rates = hop_rates(grid, pos[grid.relays[tx_cells[:, 0], tx_cells[:, 1]]],
                      pos[grid.relays[rx_cells[:, 0], rx_cells[:, 1]]],
                      tx_cells, rx_cells, power, alpha, tdma_t)
    np.minimum.at(rate, (tx_cells[:, 0], tx_cells[:, 1]), rates)
    return rate


def simulate_mh(d: Deployment, social: SocialAssignment, cell_area: float,
                tdma_t: int = 9, grid: CellGrid | None = None) -> MhResult:
    """Route every pair, count cell loads and derive throughput and delay.

    Aggregate throughput is ``n_pairs * R / (t * max_load)`` where
    ``t`` counts the reuse classes present (``min(k, g)**2``); delay is the
    mean hop count.
    """
    if grid is None:
        grid = build_cells(d, cell_area)
    k = _reuse_side(tdma_t)
    paths = [route(grid, s, v) for s, v in social.pairs]
    load = cell_load(grid, paths)
    hop_counts = np.array([p.hop_count for p in paths], dtype=np.int64)

    cfg = d.config
    cell_rate = relay_cell_rates(grid, cfg.power, cfg.path_loss_alpha, tdma_t)
    if grid.g == 1:
        # no neighbour cell: the only links are the direct pairs themselves
        pos = grid.positions
        src = social.sources
        dst = social.destinations
        zeros = np.zeros((len(src), 2), dtype=np.int64)
        cell_rate[0, 0] = float(np.min(hop_rates(
            grid, pos[src], pos[dst], zeros, zeros, cfg.power, cfg.path_loss_alpha, tdma_t)))
    slots = min(k, grid.g) ** 2
    used = load.loads > 0
    cell_rate_mean = float(np.mean(cell_rate[used]))
    per_pair = cell_rate_mean / (slots * load.max_load)
    return MhResult(
        aggregate_throughput=len(paths) * per_pair,
        mean_delay_hops=float(hop_counts.mean()),
        max_cell_load=load.max_load,
        per_cell_loads=load.per_cell,
        n_pairs=len(paths),
        bottleneck_rate=per_pair,
        cell_rate=cell_rate_mean,
        min_cell_rate=float(cell_rate[used].min()),
        tdma_slots=slots,
        hop_counts=hop_counts,
    )
