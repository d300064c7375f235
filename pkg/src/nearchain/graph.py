"""Undirected simple event graph in CSR form plus structural statistics.

Each undirected edge carries a single id shared by both CSR directions, so
peeling algorithms update one support slot per edge.  Structural statistics
cover degrees, connected components, triangle supports, mean local clustering
coefficients, and exact diameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import SCHEMA_VERSION


class EventGraph:
    """CSR adjacency: row offsets (n+1), sorted column indices (2m), edge ids."""

    def __init__(self, n, edges, row_offsets, col_indices, edge_ids):
        self.n = int(n)
        self.edges = edges  # (m, 2) int64, u < v per row, lexicographically sorted
        self.m = int(len(edges))
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.edge_ids = edge_ids
        self._adj_sets: list[set[int]] | None = None
        self._edge_index: dict[tuple[int, int], int] | None = None

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def degree(self, v: int) -> int:
        return int(self.row_offsets[v + 1] - self.row_offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v] : self.row_offsets[v + 1]]

    def adjacency_sets(self) -> list[set[int]]:
        """Per-vertex neighbor sets (cached)."""
        if self._adj_sets is None:
            ro, ci = self.row_offsets, self.col_indices
            self._adj_sets = [
                set(map(int, ci[ro[v] : ro[v + 1]])) for v in range(self.n)
            ]
        return self._adj_sets

    def edge_index(self) -> dict[tuple[int, int], int]:
        """Map (u, v) with u < v to the undirected edge id (cached)."""
        if self._edge_index is None:
            self._edge_index = {
                (int(u), int(v)): e for e, (u, v) in enumerate(self.edges)
            }
        return self._edge_index

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return (u, v) in self.edge_index()


@dataclass
class ComponentLabeling:
    """Per-vertex component ids; labels dense, ordered by smallest member."""

    labels: np.ndarray
    count: int
    components: list[np.ndarray]


def build_graph(n: int, pairs) -> EventGraph:
    """Build a CSR graph on n vertices from deduplicated undirected pairs."""
    arr = np.asarray(sorted(pairs) if isinstance(pairs, set) else list(pairs), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if len(arr):
        if arr.min() < 0 or arr.max() >= n:
            raise ValueError(
                f"edge endpoint out of range 0..{n - 1}: "
                f"min {arr.min()}, max {arr.max()}"
            )
        if (arr[:, 0] == arr[:, 1]).any():
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise ValueError(f"self-loop at vertex {int(bad[0])}")
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        edges = np.unique(np.stack([u, v], axis=1), axis=0)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    m = len(edges)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    eids = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
    order = np.lexsort((dst, src))
    row_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=row_offsets[1:])
    return EventGraph(n, edges, row_offsets, dst[order], eids[order])


def connected_components(g: EventGraph) -> ComponentLabeling:
    """BFS labeling; singleton vertices form their own components."""
    labels = np.full(g.n, -1, dtype=np.int64)
    components: list[np.ndarray] = []
    ro, ci = g.row_offsets, g.col_indices
    for seed in range(g.n):
        if labels[seed] >= 0:
            continue
        label = len(components)
        labels[seed] = label
        frontier = [seed]
        members = [seed]
        while frontier:
            nxt = []
            for v in frontier:
                for w in ci[ro[v] : ro[v + 1]]:
                    w = int(w)
                    if labels[w] < 0:
                        labels[w] = label
                        nxt.append(w)
                        members.append(w)
            frontier = nxt
        components.append(np.array(sorted(members), dtype=np.int64))
    return ComponentLabeling(labels, len(components), components)


def compute_supports(g: EventGraph) -> np.ndarray:
    """Per-edge triangle count via neighbor-set intersection."""
    adj = g.adjacency_sets()
    sup = np.zeros(g.m, dtype=np.int64)
    for e in range(g.m):
        u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
        a, b = adj[u], adj[v]
        if len(a) > len(b):
            a, b = b, a
        sup[e] = sum(1 for w in a if w in b)
    return sup


def clustering_coefficient(g: EventGraph, scope=None) -> float:
    """Mean local (Watts-Strogatz) coefficient over the scope-induced subgraph.

    Vertices with induced degree < 2 contribute 0.  ``scope=None`` means the
    whole graph.
    """
    if scope is None:
        verts = list(range(g.n))
        in_scope = None
    else:
        verts = sorted(int(v) for v in set(scope))
        in_scope = set(verts)
        if any(v < 0 or v >= g.n for v in verts):
            raise ValueError("scope vertex out of range")
    if not verts:
        raise ValueError("clustering coefficient of an empty scope")
    adj = g.adjacency_sets()
    total = 0.0
    for v in verts:
        nb = adj[v] if in_scope is None else adj[v] & in_scope
        d = len(nb)
        if d < 2:
            continue
        nbl = sorted(nb)
        tri = 0
        for i, a in enumerate(nbl):
            sa = adj[a]
            tri += sum(1 for b in nbl[i + 1 :] if b in sa)
        total += 2.0 * tri / (d * (d - 1))
    return total / len(verts)


def _diameter_floyd_warshall(sub: EventGraph) -> int:
    k = sub.n
    dist = np.full((k, k), np.inf)
    np.fill_diagonal(dist, 0.0)
    if sub.m:
        e = sub.edges
        dist[e[:, 0], e[:, 1]] = 1.0
        dist[e[:, 1], e[:, 0]] = 1.0
    for mid in range(k):
        np.minimum(dist, dist[:, mid : mid + 1] + dist[mid : mid + 1, :], out=dist)
    if np.isinf(dist).any():
        raise ValueError("diameter of a disconnected graph")
    return int(dist.max())


def _diameter_bfs(sub: EventGraph) -> int:
    k = sub.n
    ro, ci = sub.row_offsets, sub.col_indices
    best = 0
    for s in range(k):
        dist = np.full(k, -1, dtype=np.int64)
        dist[s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for v in frontier:
                for w in ci[ro[v] : ro[v + 1]]:
                    w = int(w)
                    if dist[w] < 0:
                        dist[w] = d
                        nxt.append(w)
            frontier = nxt
        if (dist < 0).any():
            raise ValueError("diameter of a disconnected graph")
        best = max(best, int(dist.max()))
    return best


FLOYD_WARSHALL_LIMIT = 512


def diameter(g: EventGraph, component=None) -> int:
    """Exact unweighted diameter of a connected graph or component.

    Uses Floyd-Warshall up to 512 vertices and repeated BFS above that;
    both are exact on unweighted graphs.  Disconnected input is an error.
    """
    if component is None:
        sub = g
    else:
        sub, _ = induced_subgraph(g, component)
    if sub.n == 0:
        raise ValueError("diameter of an empty graph")
    if sub.n == 1:
        return 0
    if sub.n <= FLOYD_WARSHALL_LIMIT:
        return _diameter_floyd_warshall(sub)
    return _diameter_bfs(sub)


def induced_subgraph(g: EventGraph, vertices) -> tuple[EventGraph, np.ndarray]:
    """Subgraph on the vertex set plus the sorted original-id remap array."""
    vs = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if len(vs) and (vs[0] < 0 or vs[-1] >= g.n):
        raise ValueError("induced vertex out of range")
    if g.m:
        mask = np.zeros(g.n, dtype=bool)
        mask[vs] = True
        keep = mask[g.edges[:, 0]] & mask[g.edges[:, 1]]
        en = np.searchsorted(vs, g.edges[keep])
    else:
        en = np.zeros((0, 2), dtype=np.int64)
    return build_graph(len(vs), en), vs


def write_edge_list(edges, path) -> None:
    """Write one "u v" line per undirected edge, u < v."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in arr:
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> np.ndarray:
    """Load an edge-list file written by :func:`write_edge_list`."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            u, v = line.split()
            rows.append((int(u), int(v)))
    return np.asarray(rows, dtype=np.int64).reshape(-1, 2)


def graph_stats(g: EventGraph) -> dict:
    """Per-component and global stats mirroring the pipeline report columns."""
    labeling = connected_components(g)
    component_stats = []
    for comp in labeling.components:
        sub, _ = induced_subgraph(g, comp)
        component_stats.append(
            {
                "vertices": int(sub.n),
                "edges": int(sub.m),
                "diameter": diameter(sub) if sub.n else 0,
                "mean_clustering_coefficient": clustering_coefficient(sub)
                if sub.n
                else 0.0,
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "vertices": int(g.n),
        "edges": int(g.m),
        "components": labeling.count,
        "component_stats": component_stats,
    }
