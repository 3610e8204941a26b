"""Fixed communication topologies: star, complete, circulant k-regular, path,
and arbitrary connected edge lists, with degree and Laplacian structure.

Agents are indexed 0..n-1. Only connected graphs are constructible; every
constructor rejects inputs that would produce a disconnected network, so
downstream dynamics never see one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction input (size, edge endpoints, parameters)."""


class DisconnectedError(GraphError):
    """Edge set does not yield a single connected component."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected connected graph.

    Adjacency is kept both as a dense 0/1 matrix (Laplacian, vectorized
    simulation) and as per-agent neighbor index arrays; the two views are
    built from the same edge set and always agree. All arrays are read-only,
    so a Graph can be shared freely across concurrent replicas.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    degrees: np.ndarray = field(repr=False)
    adjacency: np.ndarray = field(repr=False)
    neighbors: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min())

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency_float(self) -> np.ndarray:
        a = self.adjacency.astype(np.float64)
        a.setflags(write=False)
        return a

    @cached_property
    def degrees_float(self) -> np.ndarray:
        d = self.degrees.astype(np.float64)
        d.setflags(write=False)
        return d


def _connected(n: int, neighbors: list[list[int]]) -> bool:
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in neighbors[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def from_edge_list(n: int, edges) -> Graph:
    """Build a Graph from (u, v) pairs, validating endpoints and connectivity.

    Raises GraphError on out-of-range endpoints, self-loops, or duplicate
    edges, and DisconnectedError when the edge set leaves the graph
    disconnected.
    """
    if n < 2:
        raise GraphError(f"need at least 2 agents, got n={n}")
    canon: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) outside agent range 0..{n - 1}")
        if u == v:
            raise GraphError(f"self-loop on agent {u} is not allowed")
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise GraphError(f"duplicate edge {e}")
        seen.add(e)
        canon.append(e)
    canon.sort()

    adjacency = np.zeros((n, n), dtype=np.int64)
    nbr_lists: list[list[int]] = [[] for _ in range(n)]
    for u, v in canon:
        adjacency[u, v] = 1
        adjacency[v, u] = 1
        nbr_lists[u].append(v)
        nbr_lists[v].append(u)

    if not _connected(n, nbr_lists):
        raise DisconnectedError(f"graph on {n} agents with {len(canon)} edges is not connected")

    degrees = adjacency.sum(axis=1)
    neighbors = tuple(np.array(sorted(ns), dtype=np.int64) for ns in nbr_lists)
    for arr in (degrees, adjacency, *neighbors):
        arr.setflags(write=False)
    return Graph(n=n, edges=tuple(canon), degrees=degrees, adjacency=adjacency, neighbors=neighbors)


def make_star(n: int) -> Graph:
    """Star on n agents: hub 0 linked to every other agent."""
    if n < 2:
        raise GraphError(f"star needs n >= 2, got {n}")
    return from_edge_list(n, [(0, i) for i in range(1, n)])


def make_complete(n: int) -> Graph:
    """Complete graph on n agents."""
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    return from_edge_list(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def make_path(n: int) -> Graph:
    """Path (line) on n agents: 0-1-2-...-(n-1)."""
    if n < 2:
        raise GraphError(f"path needs n >= 2, got {n}")
    return from_edge_list(n, [(i, i + 1) for i in range(n - 1)])


def make_circulant_regular(n: int, k: int) -> Graph:
    """k-regular circulant: agent i linked to i +- 1, ..., i +- k/2 (mod n).

    This is the deterministic realization used for "k-regular" throughout;
    it is connected for any even 2 <= k < n because offset 1 is included.
    """
    if n < 3:
        raise GraphError(f"circulant needs n >= 3, got {n}")
    if k % 2 != 0 or k < 2:
        raise GraphError(f"circulant degree must be even and >= 2, got k={k}")
    if k >= n:
        raise GraphError(f"circulant degree must satisfy k < n, got k={k}, n={n}")
    edges = set()
    for i in range(n):
        for off in range(1, k // 2 + 1):
            j = (i + off) % n
            edges.add((i, j) if i < j else (j, i))
    return from_edge_list(n, sorted(edges))


def laplacian(g: Graph) -> np.ndarray:
    """Integer graph Laplacian: degree matrix minus adjacency.

    Symmetric, positive semi-definite, every row sums to zero, and the
    all-ones vector spans its nullspace when the graph is connected.
    """
    return np.diag(g.degrees) - g.adjacency


def read_edge_list(path) -> Graph:
    """Parse the edge-list text format: first line "n m", then m lines "u v"."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise GraphError(f"{path}: expected header 'n m'")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise GraphError(f"{path}: header must be two integers 'n m'") from exc
    body = tokens[2:]
    if len(body) != 2 * m:
        raise GraphError(f"{path}: expected {m} edges ({2 * m} integers), found {len(body)} tokens")
    try:
        edges = [(int(body[2 * i]), int(body[2 * i + 1])) for i in range(m)]
    except ValueError as exc:
        raise GraphError(f"{path}: edge endpoints must be integers") from exc
    return from_edge_list(n, edges)


def write_edge_list(g: Graph, path) -> None:
    """Write a Graph in the same text format accepted by read_edge_list."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n} {g.num_edges}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
