"""Independent brute-force oracles.

Everything here recomputes results from first principles with plain Python
loops, deliberately avoiding the production code paths it checks.
"""

import math


def hpwl_bruteforce(netlist, placement, use_pin_offsets=False):
    total = 0.0
    for net in netlist.nets:
        if len(net.pins) < 2:
            continue
        xs, ys = [], []
        for pin in net.pins:
            x, y = placement.positions[pin.node]
            if use_pin_offsets:
                x += pin.offset_x
                y += pin.offset_y
            xs.append(x)
            ys.append(y)
        total += net.weight * ((max(xs) - min(xs)) + (max(ys) - min(ys)))
    return total


def _interval_overlap(a0, a1, b0, b1):
    return max(0.0, min(a1, b1) - max(a0, b0))


def footprint_raster(grid, macro, row, col, subdiv=10):
    """Covered cells via an explicit subdiv x subdiv sub-cell sweep."""
    cx = (col + 0.5) * grid.cell_w
    cy = (row + 0.5) * grid.cell_h
    x0, x1 = cx - macro.width / 2, cx + macro.width / 2
    y0, y1 = cy - macro.height / 2, cy + macro.height / 2
    tol = 1e-9 * min(grid.cell_w, grid.cell_h)
    covered = set()
    sub_w = grid.cell_w / subdiv
    sub_h = grid.cell_h / subdiv
    for r in range(grid.rows):
        for c in range(grid.cols):
            hit = False
            for sr in range(subdiv):
                for sc in range(subdiv):
                    sx0 = c * grid.cell_w + sc * sub_w
                    sy0 = r * grid.cell_h + sr * sub_h
                    if (_interval_overlap(x0, x1, sx0, sx0 + sub_w) > tol
                            and _interval_overlap(y0, y1, sy0, sy0 + sub_h) > tol):
                        hit = True
                        break
                if hit:
                    break
            if hit:
                covered.add((r, c))
    return covered


def mask_bruteforce(grid, macro):
    """Per-cell feasibility check straight from the definition."""
    feasible = {}
    tol_x = 1e-9 * max(grid.canvas_width, 1.0)
    tol_y = 1e-9 * max(grid.canvas_height, 1.0)
    for r in range(grid.rows):
        for c in range(grid.cols):
            cx = (c + 0.5) * grid.cell_w
            cy = (r + 0.5) * grid.cell_h
            inside = (
                cx - macro.width / 2 >= -tol_x
                and cx + macro.width / 2 <= grid.canvas_width + tol_x
                and cy - macro.height / 2 >= -tol_y
                and cy + macro.height / 2 <= grid.canvas_height + tol_y
            )
            if not inside:
                feasible[(r, c)] = False
                continue
            cells = footprint_raster(grid, macro, r, c, subdiv=4)
            feasible[(r, c)] = not any(grid.occupancy[rr, cc] for rr, cc in cells)
    return feasible


def congestion_fine(netlist, placement, grid, subdiv=10):
    """RUDY demand recomputed on a subdiv-times finer grid, then aggregated."""
    rows_f, cols_f = grid.rows * subdiv, grid.cols * subdiv
    cw, ch = grid.cell_w / subdiv, grid.cell_h / subdiv
    W, H = grid.canvas_width, grid.canvas_height
    dem_h = [[0.0] * cols_f for _ in range(rows_f)]
    dem_v = [[0.0] * cols_f for _ in range(rows_f)]
    for net in netlist.nets:
        if not net.pins:
            continue
        xs = [placement.positions[p.node][0] for p in net.pins]
        ys = [placement.positions[p.node][1] for p in net.pins]
        bw = min(max(max(xs) - min(xs), grid.cell_w), W)
        bh = min(max(max(ys) - min(ys), grid.cell_h), H)
        bx = min(max((min(xs) + max(xs)) / 2 - bw / 2, 0.0), W - bw)
        by = min(max((min(ys) + max(ys)) / 2 - bh / 2, 0.0), H - bh)
        for r in range(rows_f):
            oy = _interval_overlap(by, by + bh, r * ch, (r + 1) * ch)
            if oy <= 0:
                continue
            for c in range(cols_f):
                ox = _interval_overlap(bx, bx + bw, c * cw, (c + 1) * cw)
                if ox <= 0:
                    continue
                frac = ox * oy / (bw * bh)
                dem_h[r][c] += net.weight / bh * frac
                dem_v[r][c] += net.weight / bw * frac
    # Aggregate fine cells back onto the evaluation grid.
    agg_h = [[0.0] * grid.cols for _ in range(grid.rows)]
    agg_v = [[0.0] * grid.cols for _ in range(grid.rows)]
    for r in range(rows_f):
        for c in range(cols_f):
            agg_h[r // subdiv][c // subdiv] += dem_h[r][c]
            agg_v[r // subdiv][c // subdiv] += dem_v[r][c]
    return agg_h, agg_v


def density_overflow_fine(netlist, placement, grid, target_density, subdiv=10):
    """Cell area sums recomputed on a finer raster, overflow on grid cells."""
    rows_f, cols_f = grid.rows * subdiv, grid.cols * subdiv
    cw, ch = grid.cell_w / subdiv, grid.cell_h / subdiv
    area_f = [[0.0] * cols_f for _ in range(rows_f)]
    movable_total = 0.0
    for node in netlist.nodes:
        if node.kind == "terminal":
            continue
        if node.movable:
            movable_total += node.width * node.height
        if not placement.placed[node.id]:
            continue
        x, y = placement.positions[node.id]
        x0, x1 = x - node.width / 2, x + node.width / 2
        y0, y1 = y - node.height / 2, y + node.height / 2
        for r in range(rows_f):
            oy = _interval_overlap(y0, y1, r * ch, (r + 1) * ch)
            if oy <= 0:
                continue
            for c in range(cols_f):
                ox = _interval_overlap(x0, x1, c * cw, (c + 1) * cw)
                if ox > 0:
                    area_f[r][c] += ox * oy
    if movable_total <= 0:
        return 0.0
    cell_area = grid.cell_w * grid.cell_h
    overflow = 0.0
    for r in range(grid.rows):
        for c in range(grid.cols):
            s = 0.0
            for sr in range(subdiv):
                for sc in range(subdiv):
                    s += area_f[r * subdiv + sr][c * subdiv + sc]
            overflow += max(0.0, s - target_density * cell_area)
    return overflow / movable_total


def top_fraction_mean_sorted(values, capacity, top_fraction):
    """Full-sort route for the congestion score reduction."""
    ratios = sorted((max(0.0, v - capacity) / capacity for v in values), reverse=True)
    k = math.ceil(top_fraction * len(ratios))
    return sum(ratios[:k]) / k


def laplacian_5pt(psi, dx, dy):
    """Zero-Neumann 5-point Laplacian with mirrored ghost cells."""
    rows = len(psi)
    cols = len(psi[0])
    out = [[0.0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            up = psi[i - 1][j] if i > 0 else psi[i][j]
            dn = psi[i + 1][j] if i < rows - 1 else psi[i][j]
            lf = psi[i][j - 1] if j > 0 else psi[i][j]
            rt = psi[i][j + 1] if j < cols - 1 else psi[i][j]
            out[i][j] = (lf + rt - 2 * psi[i][j]) / dx**2 + (up + dn - 2 * psi[i][j]) / dy**2
    return out
