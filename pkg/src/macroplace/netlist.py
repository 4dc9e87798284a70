"""Netlist, placement, and the exact wirelength/statistics evaluators.

Coordinates are real-valued microns. Node positions always refer to the
*center* of the node's bounding box; grid snapping is the grid module's
concern, not this one's.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import EvaluationError

KIND_MACRO = "macro"
KIND_STD = "std_cell"
KIND_TERMINAL = "terminal"
NODE_KINDS = (KIND_MACRO, KIND_STD, KIND_TERMINAL)


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    width: float
    height: float
    kind: str
    movable: bool

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Pin:
    node: int
    offset_x: float = 0.0
    offset_y: float = 0.0


@dataclass(frozen=True)
class Net:
    id: int
    name: str
    pins: tuple[Pin, ...]
    weight: float = 1.0


@dataclass(eq=False)
class Netlist:
    """A design: nodes, nets, and the canvas they live on.

    Treated as immutable once constructed; evaluators are pure functions
    over shared read-only netlists.
    """

    nodes: list[Node]
    nets: list[Net]
    canvas_width: float
    canvas_height: float
    target_density: float = 1.0

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def canvas_area(self) -> float:
        return self.canvas_width * self.canvas_height

    @cached_property
    def movable_area(self) -> float:
        return float(sum(n.area for n in self.nodes if n.movable))

    @cached_property
    def node_degrees(self) -> np.ndarray:
        """Number of nets incident to each node (multiple pins on one net count once)."""
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for net in self.nets:
            for node_id in {p.node for p in net.pins}:
                deg[node_id] += 1
        return deg

    @cached_property
    def _flat_pins(self):
        """Flattened pin arrays for vectorized HPWL: (net starts, node ids, offsets, weights)."""
        starts = [0]
        node_ids: list[int] = []
        offs: list[tuple[float, float]] = []
        weights = []
        for net in self.nets:
            node_ids.extend(p.node for p in net.pins)
            offs.extend((p.offset_x, p.offset_y) for p in net.pins)
            starts.append(len(node_ids))
            weights.append(net.weight)
        return (
            np.asarray(starts, dtype=np.int64),
            np.asarray(node_ids, dtype=np.int64),
            np.asarray(offs, dtype=np.float64).reshape(len(node_ids), 2),
            np.asarray(weights, dtype=np.float64),
        )

    def macros(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == KIND_MACRO]

    def std_cells(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == KIND_STD]

    def terminals(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == KIND_TERMINAL]


@dataclass
class Placement:
    """Per-node center coordinates plus a placed flag.

    Functional updates only: `updated` returns a new Placement, so concurrent
    rollouts can share a base placement safely.
    """

    positions: np.ndarray  # (N, 2) float64 centers in microns
    placed: np.ndarray  # (N,) bool

    @staticmethod
    def empty(num_nodes: int) -> "Placement":
        return Placement(
            positions=np.zeros((num_nodes, 2), dtype=np.float64),
            placed=np.zeros(num_nodes, dtype=bool),
        )

    def copy(self) -> "Placement":
        return Placement(self.positions.copy(), self.placed.copy())

    def updated(self, node_id: int, x: float, y: float) -> "Placement":
        out = self.copy()
        out.positions[node_id] = (x, y)
        out.placed[node_id] = True
        return out

    def in_canvas(self, netlist: Netlist, tol: float = 1e-9) -> bool:
        """True if every placed node's bounding box lies within the canvas."""
        pad = tol * max(netlist.canvas_width, netlist.canvas_height, 1.0)
        for node in netlist.nodes:
            if not self.placed[node.id]:
                continue
            x, y = self.positions[node.id]
            if x - node.width / 2 < -pad or x + node.width / 2 > netlist.canvas_width + pad:
                return False
            if y - node.height / 2 < -pad or y + node.height / 2 > netlist.canvas_height + pad:
                return False
        return True


@dataclass(frozen=True)
class BenchmarkStats:
    macro_count: int
    std_cell_count: int
    terminal_count: int
    utilization: float
    max_density: float

    @property
    def total_nodes(self) -> int:
        return self.macro_count + self.std_cell_count + self.terminal_count


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def hpwl(netlist: Netlist, placement: Placement, use_pin_offsets: bool = False) -> float:
    """Total weighted half-perimeter wirelength over all nets.

    Pin position is the owning node's center, plus the pin offset when
    `use_pin_offsets` is set. Nets with fewer than two pins contribute zero.
    Raises EvaluationError (naming the node) if a net references an unplaced
    node.
    """
    starts, node_ids, offsets, weights = netlist._flat_pins
    if len(node_ids):
        unplaced = ~placement.placed[node_ids]
        if unplaced.any():
            bad = netlist.nodes[int(node_ids[np.argmax(unplaced)])]
            raise EvaluationError(f"net references unplaced node '{bad.name}' (id {bad.id})")
    pts = placement.positions[node_ids]
    if use_pin_offsets:
        pts = pts + offsets
    total = 0.0
    for i in range(len(netlist.nets)):
        lo, hi = starts[i], starts[i + 1]
        if hi - lo < 2:
            continue
        seg = pts[lo:hi]
        total += weights[i] * (
            (seg[:, 0].max() - seg[:, 0].min()) + (seg[:, 1].max() - seg[:, 1].min())
        )
    return float(total)


def stats(netlist: Netlist) -> BenchmarkStats:
    """Benchmark statistics: node counts by kind, utilization, max density."""
    kinds = [n.kind for n in netlist.nodes]
    util = netlist.movable_area / netlist.canvas_area if netlist.canvas_area > 0 else 0.0
    if util > 1.0:
        warnings.warn(f"utilization {util:.3f} exceeds 1.0", stacklevel=2)
    return BenchmarkStats(
        macro_count=kinds.count(KIND_MACRO),
        std_cell_count=kinds.count(KIND_STD),
        terminal_count=kinds.count(KIND_TERMINAL),
        utilization=util,
        max_density=netlist.target_density,
    )


def validate(netlist: Netlist) -> ValidationReport:
    """Check structural invariants; failures are reported, never raised."""
    report = ValidationReport()
    n = netlist.num_nodes
    for node in netlist.nodes:
        if node.id < 0 or node.id >= n or netlist.nodes[node.id] is not node:
            report.violations.append(f"node '{node.name}': id {node.id} is not its dense index")
        if node.width <= 0 or node.height <= 0:
            report.violations.append(f"node '{node.name}': nonpositive dimensions")
        if node.kind not in NODE_KINDS:
            report.violations.append(f"node '{node.name}': unknown kind '{node.kind}'")
        if node.kind == KIND_TERMINAL and node.movable:
            report.violations.append(f"node '{node.name}': terminals must not be movable")
    for net in netlist.nets:
        if not net.pins:
            report.violations.append(f"net '{net.name}': no pins")
        if net.weight < 0:
            report.violations.append(f"net '{net.name}': negative weight")
        for k, pin in enumerate(net.pins):
            if pin.node < 0 or pin.node >= n:
                report.violations.append(
                    f"net '{net.name}' pin {k}: node id {pin.node} out of range"
                )
                continue
            node = netlist.nodes[pin.node]
            if abs(pin.offset_x) > node.width / 2 or abs(pin.offset_y) > node.height / 2:
                report.violations.append(
                    f"net '{net.name}' pin {k}: offset outside node '{node.name}'"
                )
    if netlist.canvas_width <= 0 or netlist.canvas_height <= 0:
        report.violations.append("canvas dimensions must be positive")
    if not (0 < netlist.target_density <= 1):
        report.violations.append(f"target_density {netlist.target_density} not in (0, 1]")
    elif netlist.canvas_area > 0:
        budget = netlist.target_density * netlist.canvas_area
        if netlist.movable_area > budget * (1 + 1e-12):
            report.warnings.append(
                f"movable area {netlist.movable_area:.6g} exceeds "
                f"target_density x canvas = {budget:.6g}"
            )
    return report
