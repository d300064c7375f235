"""Independent brute-force oracles for the test suite.

Everything here is written from first principles — definitional fixpoints,
dense matrices, double loops, an independently sourced projection series —
so production results can be checked against implementations that share no
code or algorithmic structure with the package.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

# ------------------------------------------------------------- projection

_A = 6378137.0
_F = 1.0 / 298.257223563
_K0 = 0.9996
_E2 = _F * (2.0 - _F)
_EP2 = _E2 / (1.0 - _E2)


def snyder_utm(lat_deg: float, lon_deg: float, zone: int):
    """Forward UTM by the classic USGS truncated series (independent of the
    production flattening-series formulation).  Good to a few millimeters
    within about three degrees of the central meridian."""
    phi = math.radians(lat_deg)
    lam = math.radians(lon_deg)
    lam0 = math.radians(zone * 6 - 183)
    sin_phi, cos_phi, tan_phi = math.sin(phi), math.cos(phi), math.tan(phi)
    n_rad = _A / math.sqrt(1.0 - _E2 * sin_phi * sin_phi)
    t = tan_phi * tan_phi
    c = _EP2 * cos_phi * cos_phi
    a_ser = (lam - lam0) * cos_phi
    m_arc = _A * (
        (1 - _E2 / 4 - 3 * _E2**2 / 64 - 5 * _E2**3 / 256) * phi
        - (3 * _E2 / 8 + 3 * _E2**2 / 32 + 45 * _E2**3 / 1024) * math.sin(2 * phi)
        + (15 * _E2**2 / 256 + 45 * _E2**3 / 1024) * math.sin(4 * phi)
        - (35 * _E2**3 / 3072) * math.sin(6 * phi)
    )
    easting = (
        _K0
        * n_rad
        * (
            a_ser
            + (1 - t + c) * a_ser**3 / 6
            + (5 - 18 * t + t * t + 72 * c - 58 * _EP2) * a_ser**5 / 120
        )
        + 500000.0
    )
    northing = _K0 * (
        m_arc
        + n_rad
        * tan_phi
        * (
            a_ser**2 / 2
            + (5 - t + 9 * c + 4 * c * c) * a_ser**4 / 24
            + (61 - 58 * t + t * t + 600 * c - 330 * _EP2) * a_ser**6 / 720
        )
    )
    if lat_deg < 0:
        northing += 10000000.0
    return easting, northing


# ------------------------------------------------------------------ graphs


def adjacency_matrix(n: int, edges) -> np.ndarray:
    mat = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        mat[u, v] = mat[v, u] = True
    return mat


def closure_components(n: int, edges) -> list[int]:
    """Component labels by boolean transitive closure (dense matrix powers)."""
    reach = adjacency_matrix(n, edges) | np.eye(n, dtype=bool)
    while True:
        nxt = reach | (reach @ reach)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    first = [int(np.nonzero(reach[v])[0][0]) for v in range(n)]
    order = sorted(set(first))
    remap = {root: i for i, root in enumerate(order)}
    return [remap[f] for f in first]


def peel_core_numbers(n: int, edges) -> list[int]:
    """Core numbers by remove-below-k-until-fixpoint, one k at a time."""
    adj = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    core = [0] * n
    k = 1
    alive = set(range(n))
    while alive:
        while True:
            drop = {v for v in alive if len(adj[v] & alive) < k}
            if not drop:
                break
            alive -= drop
        for v in alive:
            core[v] = k
        k += 1
    return core


def recount_truss_numbers(edges) -> dict[tuple[int, int], int]:
    """Truss numbers by remove-and-recount fixpoints, one k at a time."""
    alive = {(min(u, v), max(u, v)) for u, v in edges}
    tn = {e: 2 for e in alive}
    k = 3
    while alive:
        while True:
            adj = defaultdict(set)
            for u, v in alive:
                adj[u].add(v)
                adj[v].add(u)
            drop = [(u, v) for u, v in alive if len(adj[u] & adj[v]) < k - 2]
            if not drop:
                break
            alive -= set(drop)
        for e in alive:
            tn[e] = k
        k += 1
    return tn


def powerset_maximal_cliques(n: int, edges) -> list[tuple[int, ...]]:
    """Every maximal clique by checking all 2^n vertex subsets (n <= 16)."""
    if n > 16:
        raise ValueError("powerset oracle is for n <= 16")
    mat = adjacency_matrix(n, edges)
    cliques = []
    for mask in range(1, 1 << n):
        members = [v for v in range(n) if mask >> v & 1]
        if not all(
            mat[u, v] for i, u in enumerate(members) for v in members[i + 1 :]
        ):
            continue
        if any(
            w not in members and all(mat[w, u] for u in members)
            for w in range(n)
        ):
            continue
        cliques.append(tuple(members))
    return sorted(cliques)


def plain_maximal_cliques(n: int, edges) -> list[tuple[int, ...]]:
    """Maximal cliques by the unpivoted, unordered textbook recursion."""
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    out: list[tuple[int, ...]] = []

    def grow(r: set, p: set, x: set) -> None:
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        for v in sorted(p):
            grow(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    grow(set(), set(range(n)), set())
    return sorted(out)


def straightline_dbscan(n: int, edges, k_min: int = 3) -> dict[int, list[tuple[int, ...]]]:
    """Seeded-expansion clustering written directly from the stated rules.

    Ascending-id scan; a vertex with degree >= k in the working graph seeds a
    cluster; expansion walks every reachable working-graph vertex (border
    members pass the frontier along); unvisited vertices are removed, k
    increments, repeat until the working graph empties.
    """
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    alive = set(range(n))
    out: dict[int, list[tuple[int, ...]]] = {}
    k = k_min
    while alive:
        deg = {v: len(adj[v] & alive) for v in alive}
        visited: set[int] = set()
        clusters: list[tuple[int, ...]] = []
        for v in sorted(alive):
            if v in visited or deg[v] < k:
                continue
            queue = [v]
            visited.add(v)
            members = []
            while queue:
                u = queue.pop(0)
                members.append(u)
                for w in sorted(adj[u] & alive):
                    if w not in visited:
                        visited.add(w)
                        queue.append(w)
            clusters.append(tuple(sorted(members)))
        if not clusters:
            break
        out[k] = sorted(clusters)
        alive = set()
        for c in clusters:
            alive |= set(c)
        k += 1
    return out


def matrix_supports(n: int, edges) -> dict[tuple[int, int], int]:
    """Per-edge triangle counts from the dense adjacency matrix."""
    mat = adjacency_matrix(n, edges)
    return {
        (min(u, v), max(u, v)): int((mat[u] & mat[v]).sum()) for u, v in edges
    }


def matrix_coefficient(n: int, edges, scope=None) -> float:
    """Mean local clustering coefficient straight from the definition."""
    mat = adjacency_matrix(n, edges)
    scope = list(range(n)) if scope is None else sorted(scope)
    inside = np.zeros(n, dtype=bool)
    inside[scope] = True
    total = 0.0
    for v in scope:
        nbrs = [w for w in np.nonzero(mat[v])[0] if inside[w]]
        d = len(nbrs)
        if d < 2:
            continue
        links = sum(
            1 for i, u in enumerate(nbrs) for w in nbrs[i + 1 :] if mat[u, w]
        )
        total += 2.0 * links / (d * (d - 1))
    return total / len(scope)


def bfs_diameter(n: int, edges) -> int:
    """Diameter by queue-based BFS from every vertex (connected inputs)."""
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    best = 0
    for s in range(n):
        dist = {s: 0}
        queue = [s]
        while queue:
            u = queue.pop(0)
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if len(dist) != n:
            raise ValueError("disconnected")
        best = max(best, max(dist.values()))
    return best


# ------------------------------------------------------------------ spatial


def double_loop_pairs(coords: np.ndarray, r_x: float, r_y: float, r_t: float) -> np.ndarray:
    """All near-repeat pairs by the O(n^2) dense comparison, row-chunked."""
    n = len(coords)
    out = []
    cols = np.arange(n)
    chunk = max(1, 4_000_000 // max(n, 1))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        dx = np.abs(coords[start:stop, 0:1] - coords[None, :, 0].reshape(1, -1))
        dy = np.abs(coords[start:stop, 1:2] - coords[None, :, 1].reshape(1, -1))
        dt = np.abs(coords[start:stop, 2:3] - coords[None, :, 2].reshape(1, -1))
        hit = (dx <= r_x) & (dy <= r_y) & (dt <= r_t)
        hit &= cols[None, :] > np.arange(start, stop)[:, None]
        ii, jj = np.nonzero(hit)
        if len(ii):
            out.append(np.stack([ii + start, jj], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.concatenate(out).astype(np.int64)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def scan_box_query(coords: np.ndarray, ids: np.ndarray, lo, hi) -> np.ndarray:
    """Closed-box membership by a linear scan."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    keep = np.all((coords >= lo) & (coords <= hi), axis=1)
    return np.sort(ids[keep])


def check_rtree(tree, expect_ids) -> None:
    """Walk an R-tree and assert every structural invariant.

    Fill bounds on every non-root node, bounding-box containment of children,
    uniform leaf depth, and exact reachability of the expected id set.
    """
    root = tree.root
    assert root is not None, "tree has no root"
    seen: list[int] = []
    leaf_depths: set[int] = set()

    def walk(node, depth: int, is_root: bool) -> None:
        lo, hi = node.bbox()
        if node.leaf:
            count = len(node.ids)
            leaf_depths.add(depth)
            seen.extend(int(i) for i in node.ids)
            assert (node.lo >= lo - 0).all() and (node.hi <= hi + 0).all()
        else:
            count = len(node.children)
            for child in node.children:
                clo, chi = child.bbox()
                assert (clo >= lo).all() and (chi <= hi).all(), "child box escapes parent"
                walk(child, depth + 1, False)
        if is_root:
            assert node.leaf or count >= 2, "internal root must have >= 2 children"
        else:
            assert tree.min_fill <= count <= tree.fanout, (
                f"node fill {count} outside [{tree.min_fill}, {tree.fanout}]"
            )

    walk(root, 0, True)
    assert len(leaf_depths) == 1, "leaves at mixed depths"
    assert leaf_depths == {tree.height}, "height field does not match leaf depth"
    assert sorted(seen) == sorted(int(i) for i in expect_ids), "points lost or duplicated"


# --------------------------------------------------------------------- knox


def dense_knox_table(
    xyt: np.ndarray,
    distance_step: float,
    time_step: float,
    distance_bins: int,
    time_bins: int,
    overflow: str = "clamp",
) -> np.ndarray:
    """Observed Knox table from full dense pairwise matrices."""
    x, y, t = xyt[:, 0], xyt[:, 1], xyt[:, 2]
    dist = np.sqrt((x[:, None] - x[None, :]) ** 2 + (y[:, None] - y[None, :]) ** 2)
    dt = np.abs(t[:, None] - t[None, :])
    iu = np.triu_indices(len(xyt), k=1)
    bi = np.floor(dist[iu] / distance_step).astype(np.int64)
    bj = np.floor(dt[iu] / time_step).astype(np.int64)
    table = np.zeros((distance_bins, time_bins), dtype=np.int64)
    if overflow == "clamp":
        bi = np.minimum(bi, distance_bins - 1)
        bj = np.minimum(bj, time_bins - 1)
    else:
        keep = (bi < distance_bins) & (bj < time_bins)
        bi, bj = bi[keep], bj[keep]
    for i, j in zip(bi, bj):
        table[i, j] += 1
    return table


def count_parseable_rows(path, time_format: str, numeric_cols, time_col) -> tuple[int, int]:
    """(parseable, rejected) totals by an independent line-by-line pass."""
    from datetime import datetime

    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    idx = {name: header.index(name) for name in header}
    good = bad = 0
    for line in lines[1:]:
        parts = line.split(",")
        try:
            for col in numeric_cols:
                value = float(parts[idx[col]])
                if not math.isfinite(value):
                    raise ValueError
            datetime.strptime(parts[idx[time_col]], time_format)
            good += 1
        except (ValueError, IndexError, KeyError):
            bad += 1
    return good, bad
