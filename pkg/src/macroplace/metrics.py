"""Environment feedback: congestion maps, density overflow, and the scalar
proxy cost whose negation is the episode reward.

Congestion uses RUDY-style net smearing: each net's demand is spread
uniformly over its bounding box (clamped to at least one grid cell in each
dimension and shifted to stay on canvas). Pin positions are node centers;
the pin-offset approximation matches the rest of the proxy pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .grid import Grid
from .netlist import KIND_TERMINAL, Netlist, Placement

# Routing capacity per cell, horizontal == vertical. Calibrated once as the
# 95th percentile of nonzero per-cell single-net demand over the bundled
# four-design synthetic suite on a 32x32 grid (see tools/calibrate_capacity.py).
DEFAULT_CAPACITY = 0.8


@dataclass
class CongestionMap:
    demand_h: np.ndarray  # (rows, cols) horizontal track-demand density
    demand_v: np.ndarray
    capacity_h: float
    capacity_v: float

    @property
    def shape(self):
        return self.demand_h.shape


@dataclass(frozen=True)
class RewardWeights:
    w_hpwl: float = 1.0
    w_cong: float = 0.5
    w_dens: float = 0.5


@dataclass(frozen=True)
class Metrics:
    hpwl: float
    cong_h: float
    cong_v: float
    density_overflow: float
    proxy_cost: float

    @property
    def reward(self) -> float:
        return -self.proxy_cost


def _axis_overlap(lo: float, hi: float, cell: float, count: int):
    """Overlap length of [lo, hi] with each grid cell along one axis.

    Returns (first cell index, overlap-length vector)."""
    first = max(int(math.floor(lo / cell)), 0)
    last = min(int(math.ceil(hi / cell)) - 1, count - 1)
    if last < first:
        return 0, np.zeros(0)
    idx = np.arange(first, last + 1)
    return first, np.minimum(hi, (idx + 1) * cell) - np.maximum(lo, idx * cell)


def congestion_map(
    netlist: Netlist,
    placement: Placement,
    grid: Grid,
    capacity_h: float = DEFAULT_CAPACITY,
    capacity_v: float = DEFAULT_CAPACITY,
) -> CongestionMap:
    """RUDY demand maps. Horizontal demand of a net is w/h_box, vertical is
    w/w_box, each distributed over the box proportionally to overlap area."""
    demand_h = np.zeros((grid.rows, grid.cols))
    demand_v = np.zeros((grid.rows, grid.cols))
    W, H = grid.canvas_width, grid.canvas_height

    for net in netlist.nets:
        if not net.pins:
            continue
        ids = [p.node for p in net.pins]
        for nid in ids:
            if not placement.placed[nid]:
                raise EvaluationError(
                    f"net '{net.name}' references unplaced node "
                    f"'{netlist.nodes[nid].name}'"
                )
        pts = placement.positions[ids]
        x0, x1 = pts[:, 0].min(), pts[:, 0].max()
        y0, y1 = pts[:, 1].min(), pts[:, 1].max()
        # Clamp the box to at least one cell per axis, then shift on-canvas.
        bw = min(max(x1 - x0, grid.cell_w), W)
        bh = min(max(y1 - y0, grid.cell_h), H)
        bx = min(max((x0 + x1) / 2 - bw / 2, 0.0), W - bw)
        by = min(max((y0 + y1) / 2 - bh / 2, 0.0), H - bh)

        c0, wx = _axis_overlap(bx, bx + bw, grid.cell_w, grid.cols)
        r0, wy = _axis_overlap(by, by + bh, grid.cell_h, grid.rows)
        if len(wx) == 0 or len(wy) == 0:
            continue
        frac = np.outer(wy, wx) / (bw * bh)  # overlap-area fractions, sums to 1
        demand_h[r0:r0 + len(wy), c0:c0 + len(wx)] += net.weight / bh * frac
        demand_v[r0:r0 + len(wy), c0:c0 + len(wx)] += net.weight / bw * frac

    return CongestionMap(demand_h=demand_h, demand_v=demand_v,
                         capacity_h=capacity_h, capacity_v=capacity_v)


def _top_overflow(demand: np.ndarray, capacity: float, top_fraction: float) -> float:
    ratios = np.maximum(0.0, demand.ravel() - capacity) / capacity
    k = math.ceil(top_fraction * ratios.size)
    if k >= ratios.size:
        return float(ratios.mean())
    top = np.partition(ratios, ratios.size - k)[ratios.size - k:]
    return float(top.mean())


def congestion_scores(cmap: CongestionMap, top_fraction: float = 0.1):
    """Mean overflow ratio over the most congested cells, per orientation."""
    if not (0 < top_fraction <= 1):
        raise ValueError(f"top_fraction must be in (0, 1], got {top_fraction}")
    return (
        _top_overflow(cmap.demand_h, cmap.capacity_h, top_fraction),
        _top_overflow(cmap.demand_v, cmap.capacity_v, top_fraction),
    )


def rasterize_area(netlist: Netlist, placement: Placement, rows: int, cols: int,
                   cell_w: float, cell_h: float, include_fixed: bool = True) -> np.ndarray:
    """Area of placed nodes in each cell, split proportionally by overlap.

    Terminals are excluded; they carry no placeable area.
    """
    area = np.zeros((rows, cols))
    for node in netlist.nodes:
        if node.kind == KIND_TERMINAL or not placement.placed[node.id]:
            continue
        if not include_fixed and not node.movable:
            continue
        x, y = placement.positions[node.id]
        c0, wx = _axis_overlap(x - node.width / 2, x + node.width / 2, cell_w, cols)
        r0, wy = _axis_overlap(y - node.height / 2, y + node.height / 2, cell_h, rows)
        if len(wx) == 0 or len(wy) == 0:
            continue
        area[r0:r0 + len(wy), c0:c0 + len(wx)] += np.outer(wy, wx)
    return area


def density_overflow(netlist: Netlist, placement: Placement, grid: Grid,
                     target_density: float | None = None) -> float:
    """Fraction of movable area sitting above the per-cell density target."""
    if target_density is None:
        target_density = netlist.target_density
    movable_area = netlist.movable_area
    if movable_area <= 0:
        return 0.0
    area = rasterize_area(netlist, placement, grid.rows, grid.cols,
                          grid.cell_w, grid.cell_h)
    cell_area = grid.cell_w * grid.cell_h
    overflow = np.maximum(0.0, area - target_density * cell_area).sum()
    return float(overflow / movable_area)


def proxy_cost(hpwl_value: float, cong_h: float, cong_v: float, dens: float,
               net_count: int, canvas_width: float, canvas_height: float,
               weights: RewardWeights = RewardWeights()) -> float:
    """Scalar cost; reward = -cost. HPWL is normalized by
    net count x canvas half-perimeter so rewards stay in a stable range."""
    if weights.w_hpwl < 0 or weights.w_cong < 0 or weights.w_dens < 0:
        raise ValueError("reward weights must be nonnegative")
    denom = net_count * (canvas_width + canvas_height)
    hpwl_norm = hpwl_value / denom if denom > 0 else 0.0
    return (
        weights.w_hpwl * hpwl_norm
        + weights.w_cong * (cong_h + cong_v) / 2
        + weights.w_dens * dens
    )


def evaluate(netlist: Netlist, placement: Placement, grid: Grid,
             weights: RewardWeights = RewardWeights(),
             capacity_h: float = DEFAULT_CAPACITY,
             capacity_v: float = DEFAULT_CAPACITY,
             use_pin_offsets: bool = False,
             top_fraction: float = 0.1) -> Metrics:
    """One-stop proxy metrics for a fully placed design."""
    from .netlist import hpwl as hpwl_fn

    wl = hpwl_fn(netlist, placement, use_pin_offsets=use_pin_offsets)
    cmap = congestion_map(netlist, placement, grid, capacity_h, capacity_v)
    ch, cv = congestion_scores(cmap, top_fraction)
    dens = density_overflow(netlist, placement, grid)
    cost = proxy_cost(wl, ch, cv, dens, len(netlist.nets),
                      netlist.canvas_width, netlist.canvas_height, weights)
    return Metrics(hpwl=wl, cong_h=ch, cong_v=cv, density_overflow=dens,
                   proxy_cost=cost)
