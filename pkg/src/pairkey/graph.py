"""Undirected simple graphs on nodes 1..n and the predicates the experiments need.

Node ids are 1-based everywhere in this module. Graphs are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator


class Graph:
    """Undirected simple graph on nodes 1..n.

    Edges are stored both as a hashed set of (i, j) pairs with i < j and as
    per-node adjacency sets, so membership tests and neighbor iteration are
    O(1) amortized.
    """

    __slots__ = ("node_count", "_edges", "_adj")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]] = ()):
        if node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {node_count}")
        self.node_count = node_count
        adj: list[set[int]] = [set() for _ in range(node_count + 1)]
        edge_set: set[tuple[int, int]] = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if i > j:
                i, j = j, i
            self._check_node(i, node_count)
            self._check_node(j, node_count)
            if (i, j) in edge_set:
                continue
            edge_set.add((i, j))
            adj[i].add(j)
            adj[j].add(i)
        self._edges = edge_set
        self._adj = adj

    @staticmethod
    def _check_node(i: int, n: int) -> None:
        if not 1 <= i <= n:
            raise ValueError(f"node id {i} out of range 1..{n}")

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self._edges

    def neighbors(self, i: int) -> frozenset[int]:
        self._check_node(i, self.node_count)
        return frozenset(self._adj[i])

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges as (i, j) with i < j, sorted lexicographically."""
        return iter(sorted(self._edges))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.node_count == other.node_count and self._edges == other._edges

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, edges={self.edge_count})"


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected-component ids, one per node (index 0 holds node 1)."""

    labels: tuple[int, ...]
    component_count: int


def degree(g: Graph, i: int) -> int:
    g._check_node(i, g.node_count)
    return len(g._adj[i])


def isolated_count(g: Graph) -> int:
    """Number of degree-zero nodes."""
    return sum(1 for i in range(1, g.node_count + 1) if not g._adj[i])


class _DisjointSet:
    """Union-find with union by size and path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)
        self.count = n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1


def is_connected(g: Graph) -> bool:
    """True iff every pair of nodes is joined by a path (single node: True).

    Production path; uses disjoint-set union. Cross-checked against
    :func:`is_connected_bfs` in the test suite.
    """
    ds = _DisjointSet(g.node_count)
    for i, j in g._edges:
        ds.union(i, j)
    return ds.count == 1


def is_connected_bfs(g: Graph) -> bool:
    """Traversal-based connectivity check, kept as an independent oracle."""
    n = g.node_count
    seen = [False] * (n + 1)
    seen[1] = True
    queue = deque([1])
    reached = 1
    while queue:
        v = queue.popleft()
        for w in g._adj[v]:
            if not seen[w]:
                seen[w] = True
                reached += 1
                queue.append(w)
    return reached == n


def connected_components(g: Graph) -> ComponentLabeling:
    """Label each node with a component id; ids are 0..count-1 in order of
    smallest member node."""
    ds = _DisjointSet(g.node_count)
    for i, j in g._edges:
        ds.union(i, j)
    root_to_label: dict[int, int] = {}
    labels = []
    for i in range(1, g.node_count + 1):
        r = ds.find(i)
        if r not in root_to_label:
            root_to_label[r] = len(root_to_label)
        labels.append(root_to_label[r])
    return ComponentLabeling(labels=tuple(labels), component_count=len(root_to_label))


def intersect(g1: Graph, g2: Graph) -> Graph:
    """Graph whose edge set is the intersection of the inputs' edge sets."""
    if g1.node_count != g2.node_count:
        raise ValueError(
            f"node counts differ: {g1.node_count} vs {g2.node_count}"
        )
    small, big = (g1, g2) if g1.edge_count <= g2.edge_count else (g2, g1)
    return Graph(g1.node_count, (e for e in small._edges if e in big._edges))


def write_edge_list(g: Graph, path) -> None:
    """Dump edges as one "i j" pair per line, 1-based, i<j, sorted."""
    with open(path, "w", newline="\n") as f:
        for i, j in g.edges():
            f.write(f"{i} {j}\n")


def read_edge_list(path, node_count: int) -> Graph:
    edges = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            i, j = line.split()
            edges.append((int(i), int(j)))
    return Graph(node_count, edges)
