"""Undirected simple graphs in canonical compressed form.

Every per-edge vector in the package (curvature, distances, sampling
probabilities) is indexed against ``Graph.edges``, which is sorted
lexicographically with ``i < j`` in each pair.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph


class GraphInputError(ValueError):
    """Raised for malformed edge lists or node indices."""


class DisconnectedGraphError(ValueError):
    """Raised when an operation needs a connected graph."""


def _canonical_pairs(raw_edges: Iterable[Sequence[int]], n: int) -> np.ndarray:
    arr = np.asarray(list(raw_edges), dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)][0]
        raise GraphInputError(f"edge {tuple(bad)} has a node index outside [0, {n})")
    arr = np.sort(arr, axis=1)
    arr = arr[arr[:, 0] != arr[:, 1]]
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(arr, axis=0)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    Build instances with :func:`build_graph`; the constructor assumes the
    edge array is already canonical.
    """

    n: int
    edges: np.ndarray
    _indptr: np.ndarray = field(repr=False)
    _indices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for arr in (self.edges, self._indptr, self._indices):
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self._indptr)
        d.setflags(write=False)
        return d

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted neighbor array of node ``i`` (a read-only view)."""
        return self._indices[self._indptr[i] : self._indptr[i + 1]]

    @property
    def adjacency(self) -> list[np.ndarray]:
        return [self.neighbors(i) for i in range(self.n)]

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(self._indices.shape[0], dtype=np.float64)
        A = sp.csr_matrix((data, self._indices, self._indptr), shape=(self.n, self.n))
        A.data.setflags(write=False)
        return A

    @cached_property
    def _edge_key(self) -> np.ndarray:
        return self.edges[:, 0] * max(self.n, 1) + self.edges[:, 1]

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        nb = self.neighbors(i)
        k = np.searchsorted(nb, j)
        return bool(k < nb.shape[0] and nb[k] == j)

    def edge_index(self, i: int, j: int) -> int:
        """Position of the undirected edge ``(i, j)`` in ``edges``."""
        a, b = (i, j) if i < j else (j, i)
        key = a * max(self.n, 1) + b
        k = int(np.searchsorted(self._edge_key, key))
        if k >= self.m or self._edge_key[k] != key:
            raise KeyError(f"({i}, {j}) is not an edge")
        return k

    def contains_pairs(self, pairs: np.ndarray) -> np.ndarray:
        """Boolean mask: which rows of an ``(k, 2)`` pair array are edges."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        if self.m == 0:
            return np.zeros(pairs.shape[0], dtype=bool)
        keys = pairs[:, 0] * max(self.n, 1) + pairs[:, 1]
        k = np.minimum(np.searchsorted(self._edge_key, keys), self.m - 1)
        return self._edge_key[k] == keys

    def edge_indices(self, pairs: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`edge_index` for an ``(k, 2)`` array of edges."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        keys = pairs[:, 0] * max(self.n, 1) + pairs[:, 1]
        k = np.searchsorted(self._edge_key, keys)
        ok = (k < self.m) & (self._edge_key[np.minimum(k, max(self.m - 1, 0))] == keys)
        if not ok.all():
            raise KeyError(f"{pairs[~ok][0].tolist()} is not an edge")
        return k

    @cached_property
    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(np.ascontiguousarray(self.edges, dtype="<i8").tobytes())
        return h.hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _from_canonical(n: int, edges: np.ndarray) -> Graph:
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n) if n else np.zeros(0, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return Graph(n=n, edges=edges.copy(), _indptr=indptr, _indices=dst[order].astype(np.int64))


def build_graph(raw_edges: Iterable[Sequence[int]], n: int) -> Graph:
    """Symmetrise, drop self-loops and merge duplicate edges.

    >>> build_graph([(0, 1), (1, 0), (2, 2)], 3).edges.tolist()
    [[0, 1]]
    """
    if n < 0:
        raise GraphInputError("node count must be non-negative")
    return _from_canonical(int(n), _canonical_pairs(raw_edges, n))


def triangle_count(g: Graph, i: int, j: int) -> int:
    """Number of common neighbours of ``i`` and ``j`` (sorted-list merge)."""
    a, b = g.neighbors(i), g.neighbors(j)
    p = q = c = 0
    la, lb = a.shape[0], b.shape[0]
    while p < la and q < lb:
        x, y = a[p], b[q]
        if x == y:
            c += 1
            p += 1
            q += 1
        elif x < y:
            p += 1
        else:
            q += 1
    return c


def common_neighbors(g: Graph, i: int, j: int) -> np.ndarray:
    return np.intersect1d(g.neighbors(i), g.neighbors(j), assume_unique=True)


def connected_components(g: Graph) -> np.ndarray:
    """Component label per node; labels ordered by smallest member."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    _, labels = csgraph.connected_components(g.adjacency_matrix, directed=False)
    # relabel so component 0 holds node 0, component 1 the next unseen node, ...
    _, first = np.unique(labels, return_index=True)
    rank = np.empty_like(first)
    rank[np.argsort(first)] = np.arange(first.shape[0])
    return rank[labels]


def is_connected(g: Graph) -> bool:
    return g.n > 0 and int(connected_components(g).max()) == 0


def induced_subgraph(g: Graph, nodes: np.ndarray) -> tuple[Graph, dict[int, int]]:
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    remap = -np.ones(g.n, dtype=np.int64)
    remap[nodes] = np.arange(nodes.shape[0])
    keep = (remap[g.edges[:, 0]] >= 0) & (remap[g.edges[:, 1]] >= 0)
    sub = remap[g.edges[keep]]
    node_map = {int(old): int(new) for new, old in enumerate(nodes)}
    return _from_canonical(int(nodes.shape[0]), sub.reshape(-1, 2)), node_map


def largest_connected_component(g: Graph) -> tuple[Graph, dict[int, int]]:
    """Induced subgraph on the largest component plus the old->new node map.

    Ties go to the component containing the smallest node index.
    """
    if g.n == 0:
        return g, {}
    labels = connected_components(g)
    sizes = np.bincount(labels)
    best = int(np.argmax(sizes))  # argmax takes the first, i.e. smallest-member component
    return induced_subgraph(g, np.flatnonzero(labels == best))


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; -1 for unreachable nodes."""
    dist = -np.ones(g.n, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = du
                queue.append(int(v))
    return dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    d = csgraph.shortest_path(g.adjacency_matrix, method="D", unweighted=True, directed=False)
    return d


def diameter(g: Graph) -> int:
    if g.n == 0:
        raise DisconnectedGraphError("empty graph has no diameter")
    best = 0
    for s in range(g.n):
        d = bfs_distances(g, s)
        if (d < 0).any():
            raise DisconnectedGraphError("graph is disconnected; diameter is infinite")
        best = max(best, int(d.max()))
    return best


def is_bipartite(g: Graph) -> bool:
    """Two-colouring BFS over every component."""
    color = -np.ones(g.n, dtype=np.int64)
    for s in range(g.n):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(int(v))
                elif color[v] == color[u]:
                    return False
    return True


@dataclass(frozen=True)
class RewiredView:
    """A graph with some base edges hidden and some new pairs added.

    ``dropped`` holds edge ids into ``base.edges``; ``added`` is an
    ``(k, 2)`` array of canonical pairs that are not base edges.
    """

    base: Graph
    dropped: np.ndarray
    added: np.ndarray

    def __post_init__(self) -> None:
        dropped = np.unique(np.asarray(self.dropped, dtype=np.int64))
        if dropped.size and (dropped[0] < 0 or dropped[-1] >= self.base.m):
            raise GraphInputError("dropped edge id out of range")
        added = np.asarray(self.added, dtype=np.int64).reshape(-1, 2)
        added = np.sort(added, axis=1)
        if (added[:, 0] == added[:, 1]).any():
            raise GraphInputError("added pairs must join distinct nodes")
        if added.size:
            if added.min() < 0 or added.max() >= self.base.n:
                raise GraphInputError("added pair has a node index out of range")
            added = np.unique(added, axis=0)
            clash = self.base.contains_pairs(added)
            if clash.any():
                a, b = added[clash][0]
                raise GraphInputError(f"added pair ({a}, {b}) is already a base edge")
        object.__setattr__(self, "dropped", dropped)
        object.__setattr__(self, "added", added)

    @classmethod
    def identity(cls, base: Graph) -> "RewiredView":
        return cls(base, np.zeros(0, dtype=np.int64), np.zeros((0, 2), dtype=np.int64))

    @property
    def is_identity(self) -> bool:
        return self.dropped.size == 0 and self.added.size == 0


def materialize(view: RewiredView) -> Graph:
    if view.is_identity:
        return view.base
    keep = np.ones(view.base.m, dtype=bool)
    keep[view.dropped] = False
    edges = np.concatenate([view.base.edges[keep], view.added])
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return _from_canonical(view.base.n, edges[order])


def add_edges(g: Graph, pairs: Iterable[Sequence[int]]) -> Graph:
    return build_graph(np.concatenate([g.edges, np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)]), g.n)


def remove_edges(g: Graph, edge_ids: Iterable[int]) -> Graph:
    return materialize(RewiredView(g, np.asarray(list(edge_ids), dtype=np.int64), np.zeros((0, 2))))


# --- edge-list text format -------------------------------------------------


def read_edge_list(path: str | Path, n: int | None = None) -> Graph:
    """Parse whitespace-separated 0-based pairs; ``#`` lines are comments.

    A header line ``n=<count>`` fixes the node count, otherwise it is
    ``max index + 1``.
    """
    pairs: list[tuple[int, int]] = []
    header_n = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if s.startswith("n="):
                try:
                    header_n = int(s[2:])
                except ValueError:
                    raise GraphInputError(f"{path}:{lineno}: bad node-count header {s!r}") from None
                continue
            parts = s.split()
            if len(parts) < 2:
                raise GraphInputError(f"{path}:{lineno}: expected two node indices")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphInputError(f"{path}:{lineno}: non-integer node index") from None
            if u < 0 or v < 0:
                raise GraphInputError(f"{path}:{lineno}: negative node index")
            pairs.append((u, v))
    if n is None:
        n = header_n
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    return build_graph(pairs, n)


def write_edge_list(g: Graph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={g.n}\n")
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")
