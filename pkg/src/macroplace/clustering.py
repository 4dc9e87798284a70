"""Standard-cell clustering and net-to-graph expansion.

Clustering shrinks the std-cell population to at most k groups by greedy
heavy-edge coarsening: repeatedly merge the pair of groups with the largest
connectivity-per-combined-area score. Macros and terminals pass through
unchanged; nets are rewired with one zero-offset pin per touched cluster,
and nets falling entirely inside one cluster are dropped.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .netlist import KIND_STD, Net, Netlist, Node, Pin, Placement


def default_cluster_count(macro_count: int) -> int:
    return min(512, max(16, 4 * macro_count))


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]  # original std-cell node ids
    area: float
    side: float  # equivalent square side


@dataclass(eq=False)
class ClusteredNetlist:
    base: Netlist
    clusters: list[Cluster]
    cluster_of: np.ndarray  # per-original-node cluster index, -1 for non-std
    placement_netlist: Netlist  # macros + terminals + cluster pseudo-nodes
    orig_to_placement: np.ndarray  # original non-std node id -> placement id, -1 for std
    cluster_to_placement: np.ndarray  # cluster index -> placement id

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def to_dict(self) -> dict:
        return {
            "clusters": [
                {"members": list(c.members), "area": c.area, "side": c.side}
                for c in self.clusters
            ],
            "cluster_of": self.cluster_of.tolist(),
        }


@dataclass(eq=False)
class AdjacencyGraph:
    """Weighted undirected graph without self-loops or parallel edges."""

    num_nodes: int
    edges_i: np.ndarray
    edges_j: np.ndarray
    weights: np.ndarray

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        np.add.at(deg, self.edges_i, 1)
        np.add.at(deg, self.edges_j, 1)
        return deg

    @cached_property
    def neighbor_csr(self):
        """(indptr, indices, weights) over both edge directions, plus the
        per-node total incident weight (0 for isolated nodes)."""
        src = np.concatenate([self.edges_i, self.edges_j])
        dst = np.concatenate([self.edges_j, self.edges_i])
        w = np.concatenate([self.weights, self.weights])
        order = np.argsort(src, kind="stable")
        src, dst, w = src[order], dst[order], w[order]
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        strength = np.zeros(self.num_nodes)
        np.add.at(strength, src, w)
        return indptr, dst, w, strength


def _pair_weights_between_std(netlist: Netlist) -> dict:
    """Clique-model connectivity between std-cell pairs: w/(p-1) per net."""
    weights: dict[tuple[int, int], float] = {}
    for net in netlist.nets:
        p = len(net.pins)
        if p < 2:
            continue
        std_nodes = sorted({
            pin.node for pin in net.pins if netlist.nodes[pin.node].kind == KIND_STD
        })
        if len(std_nodes) < 2:
            continue
        w = net.weight / (p - 1)
        for a_idx in range(len(std_nodes)):
            for b_idx in range(a_idx + 1, len(std_nodes)):
                key = (std_nodes[a_idx], std_nodes[b_idx])
                weights[key] = weights.get(key, 0.0) + w
    return weights


def cluster_std_cells(netlist: Netlist, k: int, seed: int = 0) -> ClusteredNetlist:
    """Coarsen std cells into at most k clusters.

    Deterministic: scores are pure functions of the netlist, and ties are
    broken toward the lexicographically smallest group-id pair. `seed` is
    accepted for interface stability but the coarsening itself never draws
    random numbers.
    """
    if k <= 0:
        raise ValueError(f"cluster count k must be >= 1, got {k}")
    del seed

    std_ids = [n.id for n in netlist.nodes if n.kind == KIND_STD]
    group_members: dict[int, list[int]] = {i: [i] for i in std_ids}
    group_area: dict[int, float] = {i: netlist.nodes[i].area for i in std_ids}
    adj: dict[int, dict[int, float]] = {i: {} for i in std_ids}
    for (a, b), w in _pair_weights_between_std(netlist).items():
        adj[a][b] = adj[a].get(b, 0.0) + w
        adj[b][a] = adj[b].get(a, 0.0) + w

    def score(a: int, b: int) -> float:
        w = adj[a].get(b, 0.0)
        return w / (group_area[a] + group_area[b])

    heap = []
    for a in std_ids:
        for b in adj[a]:
            if a < b:
                heap.append((-score(a, b), a, b))
    heapq.heapify(heap)

    version = {i: 0 for i in std_ids}  # bumped on every merge touching a group

    def merge(a: int, b: int) -> None:
        keep, gone = (a, b) if a < b else (b, a)
        group_members[keep].extend(group_members.pop(gone))
        group_area[keep] += group_area.pop(gone)
        gone_adj = adj.pop(gone)
        adj[keep].pop(gone, None)
        for nbr, w in gone_adj.items():
            if nbr == keep:
                continue
            adj[nbr].pop(gone, None)
            adj[keep][nbr] = adj[keep].get(nbr, 0.0) + w
            adj[nbr][keep] = adj[keep][nbr]
        version[keep] += 1
        version.pop(gone)
        for nbr in adj[keep]:
            lo, hi = (keep, nbr) if keep < nbr else (nbr, keep)
            heapq.heappush(heap, (-score(lo, hi), lo, hi))

    while len(group_members) > k and heap:
        neg, a, b = heapq.heappop(heap)
        if a not in group_members or b not in group_members:
            continue
        if -neg != score(a, b):  # stale entry
            continue
        if -neg <= 0.0:
            heap = []  # only zero-connectivity pairs remain
            break
        merge(a, b)

    # Force down to k by merging the lowest-id groups (zero connectivity left).
    while len(group_members) > k:
        remaining = sorted(group_members)
        merge(remaining[0], remaining[1])

    ordered = sorted(group_members)
    clusters = []
    cluster_of = np.full(netlist.num_nodes, -1, dtype=np.int64)
    for ci, gid in enumerate(ordered):
        members = tuple(sorted(group_members[gid]))
        area = group_area[gid]
        clusters.append(Cluster(members=members, area=area, side=math.sqrt(area)))
        for m in members:
            cluster_of[m] = ci

    # Placement netlist: non-std nodes first (original order), then clusters.
    orig_to_placement = np.full(netlist.num_nodes, -1, dtype=np.int64)
    pnodes: list[Node] = []
    for n in netlist.nodes:
        if n.kind == KIND_STD:
            continue
        orig_to_placement[n.id] = len(pnodes)
        pnodes.append(Node(id=len(pnodes), name=n.name, width=n.width, height=n.height,
                           kind=n.kind, movable=n.movable))
    cluster_to_placement = np.zeros(len(clusters), dtype=np.int64)
    for ci, cl in enumerate(clusters):
        cluster_to_placement[ci] = len(pnodes)
        pnodes.append(Node(id=len(pnodes), name=f"clu{ci}", width=cl.side,
                           height=cl.side, kind=KIND_STD, movable=True))

    pnets: list[Net] = []
    for net in netlist.nets:
        pins: list[Pin] = []
        seen_clusters: set[int] = set()
        touched: set[int] = set()
        for pin in net.pins:
            node = netlist.nodes[pin.node]
            if node.kind == KIND_STD:
                ci = int(cluster_of[pin.node])
                pid = int(cluster_to_placement[ci])
                touched.add(pid)
                if ci not in seen_clusters:
                    seen_clusters.add(ci)
                    pins.append(Pin(node=pid))
            else:
                pid = int(orig_to_placement[pin.node])
                touched.add(pid)
                pins.append(Pin(node=pid, offset_x=pin.offset_x, offset_y=pin.offset_y))
        if len(seen_clusters) == 1 and len(touched) == 1:
            continue  # internal to one cluster
        pnets.append(Net(id=len(pnets), name=net.name, pins=tuple(pins),
                         weight=net.weight))

    placement_netlist = Netlist(
        nodes=pnodes,
        nets=pnets,
        canvas_width=netlist.canvas_width,
        canvas_height=netlist.canvas_height,
        target_density=netlist.target_density,
    )
    return ClusteredNetlist(
        base=netlist,
        clusters=clusters,
        cluster_of=cluster_of,
        placement_netlist=placement_netlist,
        orig_to_placement=orig_to_placement,
        cluster_to_placement=cluster_to_placement,
    )


def base_placement(clustered: ClusteredNetlist, placement: Placement) -> Placement:
    """Map an original-netlist placement onto the placement netlist.

    Non-std nodes carry their position and placed flag over; clusters start
    unplaced.
    """
    out = Placement.empty(clustered.placement_netlist.num_nodes)
    for orig_id, pid in enumerate(clustered.orig_to_placement):
        if pid < 0:
            continue
        out.positions[pid] = placement.positions[orig_id]
        out.placed[pid] = placement.placed[orig_id]
    return out


def expand_to_graph(clustered: ClusteredNetlist, model: str = "clique") -> AdjacencyGraph:
    """Expand rewired hyperedges into a weighted graph.

    clique: w/(p-1) between every pin pair of a p-pin net. star: every pin
    node connects to the net's highest-degree pin node with weight w (no
    extra node is introduced). Parallel edges merge by weight summation.
    """
    netlist = clustered.placement_netlist
    if model not in ("clique", "star"):
        raise ValueError(f"unknown graph model '{model}'")
    acc: dict[tuple[int, int], float] = {}

    def add(a: int, b: int, w: float) -> None:
        if a == b:
            return
        key = (a, b) if a < b else (b, a)
        acc[key] = acc.get(key, 0.0) + w

    degrees = netlist.node_degrees
    for net in netlist.nets:
        p = len(net.pins)
        if p < 2:
            continue
        if model == "clique":
            w = net.weight / (p - 1)
            for i in range(p):
                for j in range(i + 1, p):
                    add(net.pins[i].node, net.pins[j].node, w)
        else:
            nodes = [pin.node for pin in net.pins]
            hub = max(nodes, key=lambda nid: (degrees[nid], -nid))
            for nid in nodes:
                add(hub, nid, net.weight)

    if acc:
        keys = sorted(acc)
        ei = np.array([k[0] for k in keys], dtype=np.int64)
        ej = np.array([k[1] for k in keys], dtype=np.int64)
        ew = np.array([acc[k] for k in keys])
    else:
        ei = np.zeros(0, dtype=np.int64)
        ej = np.zeros(0, dtype=np.int64)
        ew = np.zeros(0)
    return AdjacencyGraph(num_nodes=netlist.num_nodes, edges_i=ei, edges_j=ej, weights=ew)
