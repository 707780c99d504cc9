"""Edge-network topology: node hardware, connectivity, and hop distances.

A topology is immutable once built. Routing distance between nodes is the
hop count of the shortest path, precomputed for all pairs with BFS;
disconnected pairs carry an infinite hop count and are never priced.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NODES_HEADER = ["node_id", "x_m", "y_m", "cpu_ghz", "mem_mb"]
EDGES_HEADER = ["src", "dst"]

# (cpu GHz, memory MB) for the five default hardware classes, spanning
# 2.4-3.6 GHz and 16-24 GB.
DEFAULT_NODE_CLASSES = (
    (2.4, 16384),
    (2.7, 18432),
    (3.0, 20480),
    (3.3, 22528),
    (3.6, 24576),
)


class TopologyError(ValueError):
    """Malformed topology input or inconsistent node data."""


@dataclass(frozen=True)
class EdgeNode:
    id: int
    x_m: float
    y_m: float
    cpu_ghz: float
    mem_mb: int

    def __post_init__(self):
        if self.cpu_ghz <= 0:
            raise TopologyError(f"node {self.id}: cpu_ghz must be > 0")
        if self.mem_mb <= 0:
            raise TopologyError(f"node {self.id}: mem_mb must be > 0")


class Topology:
    """Undirected graph of edge nodes with an all-pairs hop matrix."""

    def __init__(self, nodes: Sequence[EdgeNode], edges: Iterable[tuple[int, int]]):
        ordered = sorted(nodes, key=lambda n: n.id)
        ids = [n.id for n in ordered]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise TopologyError(f"duplicate node id(s): {dup}")
        if ids != list(range(len(ordered))):
            raise TopologyError("node ids must be dense: node k must have id k")
        self.nodes: tuple[EdgeNode, ...] = tuple(ordered)

        n = len(self.nodes)
        normalized = set()
        for u, w in edges:
            if not (0 <= u < n and 0 <= w < n):
                raise TopologyError(f"edge ({u},{w}) references unknown node")
            if u == w:
                continue
            normalized.add((min(u, w), max(u, w)))
        self.edges: frozenset[tuple[int, int]] = frozenset(normalized)
        self.hop_matrix = _all_pairs_bfs(n, self.edges)
        self.hop_matrix.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def hops(self, u: int, w: int) -> int | float:
        """Shortest-path hop count; math.inf when no route exists."""
        if not (0 <= u < self.n_nodes and 0 <= w < self.n_nodes):
            raise TopologyError(f"invalid node id in hops({u}, {w})")
        h = self.hop_matrix[u, w]
        return math.inf if math.isinf(h) else int(h)


def _all_pairs_bfs(n: int, edges: frozenset[tuple[int, int]]) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, w in edges:
        adj[u].append(w)
        adj[w].append(u)
    dist = np.full((n, n), np.inf)
    for src in range(n):
        dist[src, src] = 0.0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if math.isinf(dist[src, w]):
                    dist[src, w] = dist[src, u] + 1
                    queue.append(w)
    return dist


def hops(topology: Topology, u: int, w: int) -> int | float:
    return topology.hops(u, w)


def _radius_edges(nodes: Sequence[EdgeNode], radius_m: float) -> set[tuple[int, int]]:
    edges = set()
    for i, a in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            b = nodes[j]
            if math.hypot(a.x_m - b.x_m, a.y_m - b.y_m) <= radius_m:
                edges.add((i, j))
    return edges


def _warn_isolated(nodes: Sequence[EdgeNode], edges: set[tuple[int, int]]) -> None:
    touched = {u for e in edges for u in e}
    isolated = [n.id for n in nodes if n.id not in touched]
    if isolated and len(nodes) > 1:
        warnings.warn(f"radius rule left node(s) {isolated} isolated", stacklevel=3)


def load_topology(
    nodes_file,
    edges_file=None,
    radius_m: float | None = None,
) -> Topology:
    """Load a topology from a nodes CSV plus either an edge list or a radius.

    With `radius_m`, an edge joins every node pair at Euclidean distance at
    most `radius_m`; a node left isolated by that rule is kept (with infinite
    hop rows) and a warning is recorded.
    """
    if (edges_file is None) == (radius_m is None):
        raise TopologyError("exactly one of edges_file / radius_m must be given")
    nodes = _read_nodes_csv(nodes_file)
    if radius_m is not None:
        edges = _radius_edges(nodes, radius_m)
        _warn_isolated(nodes, edges)
    else:
        n = len(nodes)
        edges = _read_edges_csv(edges_file, n)
    return Topology(nodes, edges)


def _read_nodes_csv(path) -> list[EdgeNode]:
    nodes = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != NODES_HEADER:
            raise TopologyError(f"{path}: expected header {','.join(NODES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise TopologyError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            try:
                node = EdgeNode(
                    id=int(row[0]),
                    x_m=float(row[1]),
                    y_m=float(row[2]),
                    cpu_ghz=float(row[3]),
                    mem_mb=int(row[4]),
                )
            except (ValueError, TopologyError) as exc:
                raise TopologyError(f"{path}:{lineno}: {exc}") from exc
            if node.id in seen:
                raise TopologyError(f"{path}:{lineno}: duplicate node id {node.id}")
            seen.add(node.id)
            nodes.append(node)
    return nodes


def _read_edges_csv(path, n_nodes: int) -> set[tuple[int, int]]:
    edges = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != EDGES_HEADER:
            raise TopologyError(f"{path}: expected header {','.join(EDGES_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise TopologyError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                u, w = int(row[0]), int(row[1])
            except ValueError as exc:
                raise TopologyError(f"{path}:{lineno}: {exc}") from exc
            if not (0 <= u < n_nodes and 0 <= w < n_nodes):
                raise TopologyError(f"{path}:{lineno}: edge ({u},{w}) references unknown node")
            if u != w:
                edges.add((min(u, w), max(u, w)))
    return edges


def save_topology(topology: Topology, nodes_file, edges_file) -> None:
    """Write the two-CSV serialized form; floats use shortest round-trip repr."""
    with open(nodes_file, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(NODES_HEADER)
        for n in topology.nodes:
            writer.writerow([n.id, repr(n.x_m), repr(n.y_m), repr(n.cpu_ghz), n.mem_mb])
    with open(edges_file, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EDGES_HEADER)
        for u, w in sorted(topology.edges):
            writer.writerow([u, w])


def generate_topology(
    n_nodes: int,
    node_classes: Sequence[tuple[float, int]] = DEFAULT_NODE_CLASSES,
    area_m: float = 1000.0,
    radius_m: float = 400.0,
    seed=0,
) -> Topology:
    """Place nodes uniformly at random in a square and connect by radius.

    Hardware classes are dealt round-robin and then shuffled, so class counts
    are as balanced as n_nodes allows. Deterministic for a fixed seed. A
    radius too small to connect anything yields a valid, fully disconnected
    topology; isolated nodes only trigger a warning.
    """
    if n_nodes < 1:
        raise TopologyError("n_nodes must be >= 1")
    if not node_classes:
        raise TopologyError("node_classes must be non-empty")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, area_m, size=(n_nodes, 2))
    class_idx = np.arange(n_nodes) % len(node_classes)
    rng.shuffle(class_idx)
    nodes = []
    for i in range(n_nodes):
        cpu_ghz, mem_mb = node_classes[class_idx[i]]
        nodes.append(EdgeNode(id=i, x_m=float(xy[i, 0]), y_m=float(xy[i, 1]),
                              cpu_ghz=float(cpu_ghz), mem_mb=int(mem_mb)))
    edges = _radius_edges(nodes, radius_m)
    _warn_isolated(nodes, edges)
    return Topology(nodes, edges)
