"""Discretized canvas: macro occupancy tracking and feasibility masks.

Actions address grid cells; a macro placed at cell (row, col) has its center
at that cell's center. A cell belongs to a macro's footprint when the macro's
bounding box overlaps it with positive area (boundary touch does not count).
Only macros occupy the grid; standard-cell clusters never do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PlacementError
from .netlist import Node

# Relative slack for "on the boundary" decisions, so exact-fit fixtures
# (macro width == k cells) are not lost to floating-point noise.
_REL_TOL = 1e-9


@dataclass
class Grid:
    rows: int
    cols: int
    cell_w: float
    cell_h: float
    occupancy: np.ndarray  # (rows, cols) bool, True = covered by a placed macro
    placed_macros: list = field(default_factory=list)  # (node_id, row, col)

    @staticmethod
    def empty(rows: int, cols: int, canvas_width: float, canvas_height: float) -> "Grid":
        if rows < 1 or cols < 1:
            raise ValueError("grid must have at least one row and one column")
        return Grid(
            rows=rows,
            cols=cols,
            cell_w=canvas_width / cols,
            cell_h=canvas_height / rows,
            occupancy=np.zeros((rows, cols), dtype=bool),
        )

    @property
    def num_cells(self) -> int:
        return self.rows * self.cols

    @property
    def canvas_width(self) -> float:
        return self.cell_w * self.cols

    @property
    def canvas_height(self) -> float:
        return self.cell_h * self.rows

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.cell_w, (row + 0.5) * self.cell_h)

    def copy(self) -> "Grid":
        return Grid(self.rows, self.cols, self.cell_w, self.cell_h,
                    self.occupancy.copy(), list(self.placed_macros))

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cell_w": self.cell_w,
            "cell_h": self.cell_h,
            "occupancy": self.occupancy.astype(int).tolist(),
            "placed_macros": [list(entry) for entry in self.placed_macros],
        }


@dataclass(frozen=True)
class Mask:
    feasible: np.ndarray  # (rows, cols) bool

    @property
    def any(self) -> bool:
        return bool(self.feasible.any())

    def flat(self) -> np.ndarray:
        return self.feasible.ravel()

    def to_dict(self) -> dict:
        return {"feasible": self.feasible.astype(int).tolist()}


def _cover_range(lo: float, hi: float, cell: float, count: int, tol: float):
    """Indices of cells over [0, count*cell) overlapped by [lo, hi] with
    positive length; boundary touch within `tol` is not coverage."""
    first = math.floor((lo + tol) / cell)
    last = math.ceil((hi - tol) / cell) - 1
    if last < first:  # degenerate interval: keep the cell containing its midpoint
        first = last = math.floor((lo + hi) / 2 / cell)
    return max(first, 0), min(last, count - 1), first, last


def footprint(grid: Grid, macro: Node, row: int, col: int) -> frozenset:
    """Cells intersected by the macro's bounding box centered on cell (row, col).

    Only in-range cells are returned; feasibility_mask is responsible for
    rejecting positions whose box leaves the canvas.
    """
    cx, cy = grid.cell_center(row, col)
    tol_x = _REL_TOL * grid.cell_w
    tol_y = _REL_TOL * grid.cell_h
    c0, c1, _, _ = _cover_range(cx - macro.width / 2, cx + macro.width / 2,
                                grid.cell_w, grid.cols, tol_x)
    r0, r1, _, _ = _cover_range(cy - macro.height / 2, cy + macro.height / 2,
                                grid.cell_h, grid.rows, tol_y)
    return frozenset((r, c) for r in range(r0, r1 + 1) for c in range(c0, c1 + 1))


def _footprint_offsets(grid: Grid, macro: Node):
    """Footprint as constant offsets around the action cell: placing at
    (r, c) covers rows r+dr0..r+dr1 and cols c+dc0..c+dc1."""
    tol_x = _REL_TOL * grid.cell_w
    tol_y = _REL_TOL * grid.cell_h
    wl = 0.5 - macro.width / (2 * grid.cell_w)
    wr = 0.5 + macro.width / (2 * grid.cell_w)
    hl = 0.5 - macro.height / (2 * grid.cell_h)
    hr = 0.5 + macro.height / (2 * grid.cell_h)
    dc0 = math.floor(wl + tol_x / grid.cell_w)
    dc1 = math.ceil(wr - tol_x / grid.cell_w) - 1
    dr0 = math.floor(hl + tol_y / grid.cell_h)
    dr1 = math.ceil(hr - tol_y / grid.cell_h) - 1
    return min(dr0, 0), max(dr1, 0), min(dc0, 0), max(dc1, 0)


def feasibility_mask(grid: Grid, macro: Node) -> Mask:
    """Feasible cells: the box stays inside the canvas and covers no occupied
    cell. An all-false mask is a legal result."""
    w2, h2 = macro.width / 2, macro.height / 2
    tol_x = _REL_TOL * max(grid.canvas_width, 1.0)
    tol_y = _REL_TOL * max(grid.canvas_height, 1.0)

    col_centers = (np.arange(grid.cols) + 0.5) * grid.cell_w
    row_centers = (np.arange(grid.rows) + 0.5) * grid.cell_h
    inside_c = (col_centers - w2 >= -tol_x) & (col_centers + w2 <= grid.canvas_width + tol_x)
    inside_r = (row_centers - h2 >= -tol_y) & (row_centers + h2 <= grid.canvas_height + tol_y)
    inside = inside_r[:, None] & inside_c[None, :]
    if not inside.any():
        return Mask(feasible=inside)

    dr0, dr1, dc0, dc1 = _footprint_offsets(grid, macro)
    # Sliding-window occupancy count via a zero-padded summed-area table.
    sat = np.zeros((grid.rows + 1, grid.cols + 1), dtype=np.int64)
    np.cumsum(np.cumsum(grid.occupancy, axis=0), axis=1, out=sat[1:, 1:])
    r = np.arange(grid.rows)[:, None]
    c = np.arange(grid.cols)[None, :]
    r_lo = np.clip(r + dr0, 0, grid.rows)
    r_hi = np.clip(r + dr1 + 1, 0, grid.rows)
    c_lo = np.clip(c + dc0, 0, grid.cols)
    c_hi = np.clip(c + dc1 + 1, 0, grid.cols)
    covered = (
        sat[r_hi, c_hi] - sat[r_lo, c_hi] - sat[r_hi, c_lo] + sat[r_lo, c_lo]
    )
    return Mask(feasible=inside & (covered == 0))


def place_on_grid(grid: Grid, macro: Node, row: int, col: int):
    """Place a macro; returns (new grid, continuous center position).

    Raises PlacementError for infeasible cells; unreachable when callers
    enforce the mask.
    """
    if not (0 <= row < grid.rows and 0 <= col < grid.cols):
        raise PlacementError(f"cell ({row}, {col}) out of range")
    if any(nid == macro.id for nid, _, _ in grid.placed_macros):
        raise PlacementError(f"macro '{macro.name}' is already placed")

    cx, cy = grid.cell_center(row, col)
    tol_x = _REL_TOL * max(grid.canvas_width, 1.0)
    tol_y = _REL_TOL * max(grid.canvas_height, 1.0)
    if (cx - macro.width / 2 < -tol_x
            or cx + macro.width / 2 > grid.canvas_width + tol_x
            or cy - macro.height / 2 < -tol_y
            or cy + macro.height / 2 > grid.canvas_height + tol_y):
        raise PlacementError(
            f"macro '{macro.name}' at ({row}, {col}) leaves the canvas"
        )
    cells = footprint(grid, macro, row, col)
    rows_idx = np.array([rc[0] for rc in cells])
    cols_idx = np.array([rc[1] for rc in cells])
    if grid.occupancy[rows_idx, cols_idx].any():
        raise PlacementError(
            f"macro '{macro.name}' at ({row}, {col}) overlaps occupied cells"
        )
    out = grid.copy()
    out.occupancy[rows_idx, cols_idx] = True
    out.placed_macros.append((macro.id, row, col))
    # Clamp is a no-op for feasible cells; kept as a safety net.
    x = min(max(cx, macro.width / 2), grid.canvas_width - macro.width / 2)
    y = min(max(cy, macro.height / 2), grid.canvas_height - macro.height / 2)
    return out, (x, y)
