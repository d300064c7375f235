"""3-D R-tree over event points with axis-aligned box range queries.

The production path bulk-loads with sort-tile-recursive packing, which is
deterministic for a fixed input and keeps every node within the fill bounds.
Incremental insertion is provided for tests and small updates.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

DEFAULT_FANOUT = 16
DEFAULT_MIN_FILL = 6


@dataclass(frozen=True)
class STPoint:
    """One indexed point: an event id plus its (x, y, t) coordinates."""

    event_id: int
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class Box3:
    """Axis-aligned closed box, min and max per (x, y, t) axis."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self) -> None:
        for a, b in zip(self.lo, self.hi):
            if not a <= b:
                raise ValueError(f"box min {self.lo} exceeds max {self.hi}")


class _Node:
    """Tree node; leaves store point rows, internals store child boxes."""

    __slots__ = ("leaf", "lo", "hi", "children", "ids")

    def __init__(self, leaf, lo, hi, children=None, ids=None):
        self.leaf = leaf
        self.lo = lo  # (c, 3) child lows; for a leaf these are the points
        self.hi = hi  # (c, 3) child highs; equal to lo for a leaf
        self.children = children
        self.ids = ids

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lo.min(axis=0), self.hi.max(axis=0)

    def count(self) -> int:
        return len(self.lo)


def _split_even(n: int, parts: int) -> list[int]:
    """Near-equal partition of n items into the given number of parts."""
    parts = max(1, min(parts, n))
    base, extra = divmod(n, parts)
    return [base + 1] * extra + [base] * (parts - extra)


def _chunk_count(n: int, target: int, min_fill: int) -> int:
    """Number of chunks, bounded so no near-equal chunk drops below min_fill."""
    return max(1, min(target, n // max(min_fill, 1) or 1))


class RTree3:
    """Balanced 3-D R-tree with box range queries."""

    def __init__(self, fanout: int = DEFAULT_FANOUT, min_fill: int = DEFAULT_MIN_FILL):
        if fanout < 4 or not 2 <= min_fill <= fanout // 2:
            raise ValueError(
                f"need fanout >= 4 and 2 <= min_fill <= fanout/2, got {fanout}/{min_fill}"
            )
        self.fanout = fanout
        self.min_fill = min_fill
        self.root: _Node | None = None
        self.height = 0  # levels above the leaves; a lone leaf root is height 0
        self.size = 0

    # ------------------------------------------------------------------ build

    @staticmethod
    def _leaf(pts: np.ndarray, ids: np.ndarray) -> _Node:
        return _Node(True, pts, pts, ids=ids)

    def _pack_leaves(self, pts: np.ndarray, ids: np.ndarray) -> list[_Node]:
        """Sort-tile-recursive packing of points into leaves, in tile order."""
        M, m = self.fanout, self.min_fill
        order = np.lexsort((ids, pts[:, 2], pts[:, 1], pts[:, 0]))
        pts, ids = pts[order], ids[order]
        n = len(ids)
        if n <= M:
            return [self._leaf(pts, ids)]
        n_leaves = -(-n // M)
        nx = _chunk_count(n, round(n_leaves ** (1.0 / 3.0) + 0.5), m)
        leaves: list[_Node] = []
        start = 0
        for xsize in _split_even(n, nx):
            xp, xi = pts[start : start + xsize], ids[start : start + xsize]
            start += xsize
            yorder = np.lexsort((xi, xp[:, 0], xp[:, 2], xp[:, 1]))
            xp, xi = xp[yorder], xi[yorder]
            p_chunk = -(-len(xi) // M)
            ny = _chunk_count(len(xi), round(p_chunk**0.5 + 0.5), m)
            ystart = 0
            for ysize in _split_even(len(xi), ny):
                yp, yi = xp[ystart : ystart + ysize], xi[ystart : ystart + ysize]
                ystart += ysize
                torder = np.lexsort((yi, yp[:, 1], yp[:, 0], yp[:, 2]))
                yp, yi = yp[torder], yi[torder]
                tstart = 0
                for tsize in _split_even(len(yi), -(-len(yi) // M)):
                    leaves.append(
                        self._leaf(yp[tstart : tstart + tsize], yi[tstart : tstart + tsize])
                    )
                    tstart += tsize
        return leaves

    def _pack_upward(self, nodes: list[_Node]) -> None:
        """Group a level of nodes into parents until a single root remains."""
        M = self.fanout
        height = 0
        while len(nodes) > 1:
            height += 1
            parents: list[_Node] = []
            start = 0
            for size in _split_even(len(nodes), -(-len(nodes) // M)):
                group = nodes[start : start + size]
                start += size
                los = np.stack([g.bbox()[0] for g in group])
                his = np.stack([g.bbox()[1] for g in group])
                parents.append(_Node(False, los, his, children=group))
            nodes = parents
        self.root = nodes[0]
        self.height = height

    # ---------------------------------------------------------------- insert

    def insert(self, point: STPoint) -> None:
        """Incremental insert (test path); splits keep fill bounds intact."""
        row = np.array([[point.x, point.y, point.t]], dtype=float)
        if self.root is None:
            self.root = self._leaf(row, np.array([point.event_id], dtype=np.int64))
            self.height = 0
            self.size = 1
            return
        split = self._insert_into(self.root, row[0], point.event_id)
        if split is not None:
            left, right = split
            los = np.stack([left.bbox()[0], right.bbox()[0]])
            his = np.stack([left.bbox()[1], right.bbox()[1]])
            self.root = _Node(False, los, his, children=[left, right])
            self.height += 1
        self.size += 1

    def _insert_into(self, node: _Node, row: np.ndarray, event_id: int):
        if node.leaf:
            node.lo = np.vstack([node.lo, row])
            node.hi = node.lo
            node.ids = np.append(node.ids, np.int64(event_id))
            if node.count() > self.fanout:
                return self._split_leaf(node)
            return None
        # choose the child needing the least volume enlargement
        lo = np.minimum(node.lo, row)
        hi = np.maximum(node.hi, row)
        enlarged = np.prod(hi - lo, axis=1)
        current = np.prod(node.hi - node.lo, axis=1)
        growth = enlarged - current
        best = int(np.lexsort((np.arange(node.count()), current, growth))[0])
        child = node.children[best]
        split = self._insert_into(child, row, event_id)
        if split is None:
            blo, bhi = child.bbox()
            node.lo[best], node.hi[best] = blo, bhi
            return None
        left, right = split
        node.children[best] = left
        node.lo[best], node.hi[best] = left.bbox()
        rlo, rhi = right.bbox()
        node.lo = np.vstack([node.lo, rlo[None, :]])
        node.hi = np.vstack([node.hi, rhi[None, :]])
        node.children.append(right)
        if node.count() > self.fanout:
            return self._split_internal(node)
        return None

    def _split_leaf(self, node: _Node):
        order = np.lexsort(
            (node.ids, node.lo[:, 2], node.lo[:, 1], node.lo[:, 0])
        )
        half = node.count() // 2
        a, b = order[:half], order[half:]
        return (
            self._leaf(node.lo[a], node.ids[a]),
            self._leaf(node.lo[b], node.ids[b]),
        )

    def _split_internal(self, node: _Node):
        centers = (node.lo + node.hi) / 2.0
        order = np.lexsort(
            (np.arange(node.count()), centers[:, 2], centers[:, 1], centers[:, 0])
        )
        half = node.count() // 2

        def make(idx):
            kids = [node.children[i] for i in idx]
            return _Node(False, node.lo[idx], node.hi[idx], children=kids)

        return make(order[:half]), make(order[half:])

    # ----------------------------------------------------------------- query

    def query_ids(self, lo, hi) -> np.ndarray:
        """Ids of all points p with lo <= p <= hi on every axis (closed)."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.root is None:
            return np.zeros(0, dtype=np.int64)
        out: list[np.ndarray] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.leaf:
                mask = np.all((node.lo >= lo) & (node.lo <= hi), axis=1)
                if mask.any():
                    out.append(node.ids[mask])
            else:
                hit = np.all((node.lo <= hi) & (node.hi >= lo), axis=1)
                for i in np.nonzero(hit)[0]:
                    stack.append(node.children[i])
        if not out:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(out))


def build(points, fanout: int = DEFAULT_FANOUT, min_fill: int = DEFAULT_MIN_FILL) -> RTree3:
    """Bulk-load an R-tree from STPoints (or an (ids, coords) pair)."""
    if isinstance(points, tuple) and len(points) == 2:
        ids = np.asarray(points[0], dtype=np.int64)
        coords = np.asarray(points[1], dtype=float).reshape(-1, 3)
    else:
        points = list(points)
        # STPoints carry .event_id; Events carry .id
        if points and hasattr(points[0], "event_id"):
            ids = np.array([p.event_id for p in points], dtype=np.int64)
        else:
            ids = np.array([p.id for p in points], dtype=np.int64)
        coords = np.array([[p.x, p.y, p.t] for p in points], dtype=float).reshape(-1, 3)
    if len(ids) == 0:
        raise ValueError("cannot build an R-tree from zero points")
    if not np.isfinite(coords).all():
        raise ValueError("R-tree points must have finite coordinates")
    tree = RTree3(fanout=fanout, min_fill=min_fill)
    leaves = tree._pack_leaves(coords, ids)
    tree._pack_upward(leaves)
    tree.size = len(ids)
    return tree


def range_query(tree: RTree3, box: Box3) -> np.ndarray:
    """Event ids inside the closed box, sorted ascending."""
    return tree.query_ids(box.lo, box.hi)


def _pairs_for_range(tree, coords, ids, lo_off, hi_off, start, stop):
    us, vs = [], []
    for i in range(start, stop):
        found = tree.query_ids(coords[i] - lo_off, coords[i] + hi_off)
        found = found[found > ids[i]]
        if len(found):
            us.append(np.full(len(found), ids[i], dtype=np.int64))
            vs.append(found)
    if not us:
        return np.zeros((0, 2), dtype=np.int64)
    return np.stack([np.concatenate(us), np.concatenate(vs)], axis=1)


def neighbor_pairs(
    tree: RTree3,
    events,
    r_x: float,
    r_y: float,
    r_t: float,
    workers: int = 1,
) -> np.ndarray:
    """All unordered near-repeat pairs {i, j} within the per-axis limits.

    A pair qualifies when |dx| <= r_x, |dy| <= r_y and |dt| <= r_t (closed
    bounds).  Returns an (m, 2) int64 array with u < v, lexicographically
    sorted — a canonical set representation.  The result is identical for
    any worker count.
    """
    if not (r_x > 0 and r_y > 0 and r_t > 0):
        raise ValueError("query limits r_x, r_y, r_t must all be positive")
    if isinstance(events, tuple) and len(events) == 2:
        ids = np.asarray(events[0], dtype=np.int64)
        coords = np.asarray(events[1], dtype=float).reshape(-1, 3)
    else:
        events = list(events)
        # Events carry .id/.x/.y/.t; STPoints carry .event_id
        if events and hasattr(events[0], "event_id"):
            ids = np.array([e.event_id for e in events], dtype=np.int64)
        else:
            ids = np.array([e.id for e in events], dtype=np.int64)
        coords = np.array([[e.x, e.y, e.t] for e in events], dtype=float).reshape(-1, 3)
    n = len(ids)
    if n == 0:
        return np.zeros((0, 2), dtype=np.int64)
    off = np.array([r_x, r_y, r_t], dtype=float)

    if workers <= 1:
        chunks = [_pairs_for_range(tree, coords, ids, off, off, 0, n)]
    else:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(
                    lambda se: _pairs_for_range(tree, coords, ids, off, off, se[0], se[1]),
                    zip(bounds[:-1], bounds[1:]),
                )
            )
    pairs = np.concatenate(chunks, axis=0)
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order]


def write_pairs_bin(path, pairs: np.ndarray) -> None:
    """Binary pair dump: little-endian u64 count, then u32 (i, j) pairs, i < j."""
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(arr)))
        fh.write(arr.astype("<u4").tobytes())


def read_pairs_bin(path) -> np.ndarray:
    """Load a binary pair dump written by :func:`write_pairs_bin`."""
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<Q", fh.read(8))
        body = fh.read(8 * count)
    arr = np.frombuffer(body, dtype="<u4").astype(np.int64)
    if len(arr) != 2 * count:
        raise ValueError(f"{path}: truncated pair dump")
    return arr.reshape(-1, 2)
