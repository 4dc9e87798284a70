"""Bookshelf subset reader/writer (.nodes/.nets/.pl, optional .scl).

The subset follows the academic convention: node sizes and a ``terminal``
tag in .nodes, net degrees with pin offsets measured from the node center
in .nets, lower-left node corners plus ``/FIXED`` flags in .pl, and core
rows in .scl. Coordinates are shifted on read so the canvas origin is
(0, 0); the shift is recorded in the bundle metadata and undone on write.
"""

from __future__ import annotations

import os
from collections import Counter

from .design import DesignBundle
from .errors import ParseError
from .netlist import (
    KIND_MACRO,
    KIND_STD,
    KIND_TERMINAL,
    Net,
    Netlist,
    Node,
    Pin,
    Placement,
)

DEFAULT_MACRO_THRESHOLD = 4.0  # macro iff min(w, h) >= threshold * row height


def _content_lines(path):
    """Yield (line_number, stripped line) skipping blanks, comments, headers."""
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("UCLA"):
                continue
            yield lineno, line


def _resolve_paths(path):
    """Accept a directory, an .aux file, or any member file; return the file map."""
    if os.path.isdir(path):
        nodes = [f for f in sorted(os.listdir(path)) if f.endswith(".nodes")]
        if len(nodes) != 1:
            raise ParseError(f"expected exactly one .nodes file, found {len(nodes)}", path=path)
        stem = os.path.join(path, nodes[0][: -len(".nodes")])
    elif path.endswith(".aux"):
        stem = path[: -len(".aux")]
        for _, line in _content_lines(path):
            if ":" in line:
                names = line.split(":", 1)[1].split()
                base = os.path.dirname(path)
                found = {os.path.splitext(n)[1]: os.path.join(base, n) for n in names}
                return {
                    "nodes": found.get(".nodes"),
                    "nets": found.get(".nets"),
                    "pl": found.get(".pl"),
                    "scl": found.get(".scl"),
                }
        raise ParseError("empty .aux file", path=path)
    else:
        stem = os.path.splitext(path)[0]
    files = {ext: stem + "." + ext for ext in ("nodes", "nets", "pl", "scl")}
    if not os.path.exists(files["scl"]):
        files["scl"] = None
    return files


def _parse_nodes(path):
    declared = {}
    order = []
    sizes = {}
    terminal = {}
    for lineno, line in _content_lines(path):
        if line.startswith("NumNodes") or line.startswith("NumTerminals"):
            key, _, val = line.partition(":")
            declared[key.strip()] = int(val)
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ParseError(f"malformed node line: '{line}'", path=path, line=lineno)
        name = parts[0]
        if name in sizes:
            raise ParseError(f"duplicate node '{name}'", path=path, line=lineno)
        try:
            w, h = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"bad node dimensions: '{line}'", path=path, line=lineno) from exc
        sizes[name] = (w, h)
        terminal[name] = len(parts) > 3 and parts[3].lower().startswith("terminal")
        order.append(name)
    if "NumNodes" in declared and declared["NumNodes"] != len(order):
        raise ParseError(
            f"NumNodes {declared['NumNodes']} != {len(order)} node lines parsed", path=path
        )
    return order, sizes, terminal


def _parse_nets(path, name_to_id):
    nets = []
    current = None  # [name, remaining_degree, pins]
    for lineno, line in _content_lines(path):
        if line.startswith("NumNets") or line.startswith("NumPins"):
            continue
        if line.startswith("NetDegree"):
            if current is not None and current[1] > 0:
                raise ParseError(
                    f"net '{current[0]}' missing {current[1]} pin lines", path=path, line=lineno
                )
            head, _, rest = line.partition(":")
            parts = rest.split()
            if not parts:
                raise ParseError("NetDegree without a degree", path=path, line=lineno)
            degree = int(parts[0])
            name = parts[1] if len(parts) > 1 else f"net{len(nets)}"
            current = [name, degree, []]
            nets.append(current)
            continue
        if current is None:
            raise ParseError(f"pin line outside a net: '{line}'", path=path, line=lineno)
        parts = line.replace(":", " ").split()
        node_name = parts[0]
        if node_name not in name_to_id:
            raise ParseError(f"unknown node name '{node_name}' in net '{current[0]}'",
                             path=path, line=lineno)
        ox = float(parts[2]) if len(parts) > 2 else 0.0
        oy = float(parts[3]) if len(parts) > 3 else 0.0
        current[2].append(Pin(node=name_to_id[node_name], offset_x=ox, offset_y=oy))
        current[1] -= 1
    return [(name, pins) for name, _remaining, pins in nets]


def _parse_pl(path, name_to_id):
    """Returns {node id: (llx, lly, fixed)} keyed by dense node id."""
    out = {}
    for lineno, line in _content_lines(path):
        parts = line.split()
        if len(parts) < 3:
            raise ParseError(f"malformed placement line: '{line}'", path=path, line=lineno)
        name = parts[0]
        if name not in name_to_id:
            raise ParseError(f"unknown node name '{name}' in .pl", path=path, line=lineno)
        try:
            x, y = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"bad coordinates: '{line}'", path=path, line=lineno) from exc
        fixed = "/FIXED" in line
        out[name_to_id[name]] = (x, y, fixed)
    return out


def _parse_scl(path):
    """Returns (rows, row_height) where rows are (x0, y0, width, height)."""
    rows = []
    fields = None
    with open(path, "r") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("UCLA"):
                continue
            if line.startswith("CoreRow"):
                fields = {}
                continue
            if line.startswith("End"):
                if fields is not None and "Coordinate" in fields:
                    height = fields.get("Height", 0.0)
                    pitch = fields.get("Sitespacing", fields.get("Sitewidth", 1.0))
                    width = fields.get("NumSites", 0.0) * pitch
                    rows.append((fields.get("SubrowOrigin", 0.0), fields["Coordinate"],
                                 width, height))
                fields = None
                continue
            if fields is None:
                continue
            # key : value pairs, possibly several per line (SubrowOrigin ... NumSites ...)
            tokens = line.replace(":", " : ").split()
            for i in range(len(tokens) - 2):
                if tokens[i + 1] == ":":
                    try:
                        fields[tokens[i]] = float(tokens[i + 2])
                    except ValueError:
                        pass
    if not rows:
        return [], None
    heights = [r[3] for r in rows if r[3] > 0]
    row_height = Counter(heights).most_common(1)[0][0] if heights else None
    return rows, row_height


def infer_row_height(nodes):
    """Most common height among non-terminal nodes (fallback when .scl is absent)."""
    heights = [round(n.height, 9) for n in nodes if n.kind != KIND_TERMINAL]
    if not heights:
        return None
    return Counter(heights).most_common(1)[0][0]


def parse_bookshelf(path, macro_threshold: float = DEFAULT_MACRO_THRESHOLD) -> DesignBundle:
    """Parse a Bookshelf file set into a DesignBundle.

    `path` may be a directory containing one design, an .aux file, or any
    of the member files. Node kinds: ``terminal`` tag wins; otherwise a node
    is a macro when min(width, height) >= macro_threshold * row height.
    """
    files = _resolve_paths(path)
    for key in ("nodes", "nets", "pl"):
        if files.get(key) is None or not os.path.exists(files[key]):
            raise FileNotFoundError(f"missing .{key} file for design at '{path}'")

    order, sizes, terminal_tag = _parse_nodes(files["nodes"])
    name_to_id = {name: i for i, name in enumerate(order)}
    raw_nets = _parse_nets(files["nets"], name_to_id)
    pl = _parse_pl(files["pl"], name_to_id)

    rows, row_height = [], None
    if files["scl"]:
        rows, row_height = _parse_scl(files["scl"])

    # Canvas: bounding box of core rows plus every placed node's bounding box.
    xs, ys = [], []
    for x0, y0, w, h in rows:
        xs += [x0, x0 + w]
        ys += [y0, y0 + h]
    for name in order:
        nid = name_to_id[name]
        if nid in pl:
            llx, lly, _ = pl[nid]
            w, h = sizes[name]
            xs += [llx, llx + w]
            ys += [lly, lly + h]
    if not xs:
        raise ParseError("cannot derive a canvas: no rows and no placed nodes",
                         path=files["pl"])
    origin = (min(xs), min(ys))
    canvas_w, canvas_h = max(xs) - origin[0], max(ys) - origin[1]

    nodes = []
    for i, name in enumerate(order):
        w, h = sizes[name]
        if terminal_tag[name]:
            kind, movable = KIND_TERMINAL, False
        else:
            rh = row_height
            if rh is None:
                heights = [sizes[n][1] for n in order if not terminal_tag[n]]
                rh = Counter(round(v, 9) for v in heights).most_common(1)[0][0]
                row_height = rh
            kind = KIND_MACRO if min(w, h) >= macro_threshold * rh else KIND_STD
            movable = not (i in pl and pl[i][2])
        nodes.append(Node(id=i, name=name, width=w, height=h, kind=kind, movable=movable))

    nets = [
        Net(id=i, name=name, pins=tuple(pins), weight=1.0)
        for i, (name, pins) in enumerate(raw_nets)
    ]

    netlist = Netlist(
        nodes=nodes,
        nets=nets,
        canvas_width=canvas_w,
        canvas_height=canvas_h,
        target_density=1.0,
    )
    placement = Placement.empty(len(nodes))
    for nid, (llx, lly, _fixed) in pl.items():
        node = nodes[nid]
        placement.positions[nid] = (
            llx - origin[0] + node.width / 2,
            lly - origin[1] + node.height / 2,
        )
        placement.placed[nid] = True

    movable_area = netlist.movable_area
    if netlist.canvas_area > 0 and movable_area > 0:
        netlist.target_density = min(1.0, max(0.05, movable_area / netlist.canvas_area))

    meta = {"origin": origin, "row_height": row_height}
    return DesignBundle(
        netlist=netlist,
        placement=placement,
        provenance=f"bookshelf:{os.path.abspath(files['nodes'])}",
        meta=meta,
    )


def _fmt(value) -> str:
    """Full-precision number formatting that round-trips through float()."""
    value = float(value)
    return repr(round(value, 12) if value == round(value, 12) else value)


def write_bookshelf(bundle: DesignBundle, directory, basename: str) -> dict:
    """Write .nodes/.nets/.pl/.scl files; returns the file map."""
    os.makedirs(directory, exist_ok=True)
    netlist, placement = bundle.netlist, bundle.placement
    origin = bundle.meta.get("origin", (0.0, 0.0))
    row_height = bundle.meta.get("row_height") or infer_row_height(netlist.nodes) or 1.0

    paths = {ext: os.path.join(directory, f"{basename}.{ext}")
             for ext in ("nodes", "nets", "pl", "scl")}

    terminals = [n for n in netlist.nodes if n.kind == KIND_TERMINAL]
    with open(paths["nodes"], "w") as fh:
        fh.write("UCLA nodes 1.0\n\n")
        fh.write(f"NumNodes : {len(netlist.nodes)}\n")
        fh.write(f"NumTerminals : {len(terminals)}\n")
        for n in netlist.nodes:
            tag = "\tterminal" if n.kind == KIND_TERMINAL else ""
            fh.write(f"\t{n.name}\t{_fmt(n.width)}\t{_fmt(n.height)}{tag}\n")

    num_pins = sum(len(net.pins) for net in netlist.nets)
    with open(paths["nets"], "w") as fh:
        fh.write("UCLA nets 1.0\n\n")
        fh.write(f"NumNets : {len(netlist.nets)}\n")
        fh.write(f"NumPins : {num_pins}\n")
        for net in netlist.nets:
            fh.write(f"NetDegree : {len(net.pins)}\t{net.name}\n")
            for pin in net.pins:
                name = netlist.nodes[pin.node].name
                fh.write(f"\t{name}\tB : {_fmt(pin.offset_x)} {_fmt(pin.offset_y)}\n")

    with open(paths["pl"], "w") as fh:
        fh.write("UCLA pl 1.0\n\n")
        for n in netlist.nodes:
            if placement.placed[n.id]:
                cx, cy = placement.positions[n.id]
            else:
                cx, cy = n.width / 2, n.height / 2
            llx = cx - n.width / 2 + origin[0]
            lly = cy - n.height / 2 + origin[1]
            fixed = " /FIXED" if (n.kind == KIND_TERMINAL or not n.movable) else ""
            fh.write(f"{n.name}\t{_fmt(llx)}\t{_fmt(lly)}\t: N{fixed}\n")

    # Rows reproduce the canvas exactly: one site per row, pitch = canvas width.
    n_full = max(1, int(netlist.canvas_height // row_height))
    leftover = netlist.canvas_height - n_full * row_height
    with open(paths["scl"], "w") as fh:
        fh.write("UCLA scl 1.0\n\n")
        num_rows = n_full + (1 if leftover > 1e-9 else 0)
        fh.write(f"NumRows : {num_rows}\n\n")
        for i in range(num_rows):
            height = row_height if i < n_full else leftover
            fh.write("CoreRow Horizontal\n")
            fh.write(f"  Coordinate : {_fmt(i * row_height + origin[1])}\n")
            fh.write(f"  Height : {_fmt(height)}\n")
            fh.write("  Sitewidth : 1\n")
            fh.write(f"  Sitespacing : {_fmt(netlist.canvas_width)}\n")
            fh.write(f"  SubrowOrigin : {_fmt(origin[0])}  NumSites : 1\n")
            fh.write("End\n")

    return paths
