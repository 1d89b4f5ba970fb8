"""Sequential free-node clustering and the path analytics built on it.

The clustering grows one alternating-BFS layer per step from every free
node at once.  In step ``t`` an unclustered node ``v`` joins the cluster of
the smallest free node ``f`` for which ``v`` can be reached by an
alternating path of length exactly ``t`` whose other nodes all belong to
``f``'s cluster as it stood after step ``t - 1``.

The membership test enumerates simple alternating paths by depth-limited
search, so the cost is exponential in the worst case.  That is fine: the
point of this module is to be obviously correct on small graphs, and the
distributed implementation is checked against it.

Reachability values are ``None`` when no qualifying path of length at
most the radius exists (the "infinite" value).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .graphcore import Graph, Matching, ONE_EDGE, ZERO_EDGE


class UndefinedReachability(ValueError):
    pass


def alternating_paths(graph: Graph, matching: Matching, start: int, allowed, max_len: int,
                      ) -> Iterator[list[int]]:
    """Every simple alternating path that starts at ``start``, stays inside
    ``allowed`` and has at most ``max_len`` edges (including ``[start]``).

    The yielded list is reused by the search; copy it if you keep it.
    """
    path = [start]
    on_path = {start}

    def walk(last_kind):
        yield path
        if len(path) - 1 >= max_len:
            return
        x = path[-1]
        for y in graph.adj[x]:
            if y in on_path or y not in allowed:
                continue
            k = matching.kind(x, y)
            if k == last_kind:
                continue
            path.append(y)
            on_path.add(y)
            yield from walk(k)
            path.pop()
            on_path.discard(y)

    if start in allowed:
        yield from walk(None)


def last_kind(matching: Matching, path: Sequence[int]) -> Optional[int]:
    if len(path) < 2:
        return None
    return matching.kind(path[-2], path[-1])


@dataclass
class Clustering:
    """Result of running the clustering for ``radius`` steps.

    ``assignment[v]`` is ``(center, join_round)`` or ``None``.
    """

    n: int
    radius: int
    centers: tuple[int, ...]
    assignment: list

    def center(self, v: int) -> Optional[int]:
        a = self.assignment[v]
        return None if a is None else a[0]

    def join_round(self, v: int) -> Optional[int]:
        a = self.assignment[v]
        return None if a is None else a[1]

    def members(self, center: int, t: Optional[int] = None) -> set[int]:
        """``C_center(t)``; ``t=None`` means the final clusters."""
        t = self.radius if t is None else min(t, self.radius)
        return {v for v, a in enumerate(self.assignment)
                if a is not None and a[0] == center and a[1] <= t}

    def clusters(self, t: Optional[int] = None) -> dict[int, set[int]]:
        return {f: self.members(f, t) for f in self.centers}

    def truncate(self, r: int) -> "Clustering":
        """The clustering after ``r`` steps.  The step loop does not look
        ahead, so this is identical to running only ``r`` steps."""
        if r > self.radius:
            raise ValueError("cannot extend a clustering by truncation")
        assign = [a if a is not None and a[1] <= r else None for a in self.assignment]
        return Clustering(self.n, r, self.centers, assign)

    def is_uniform(self, path: Sequence[int], t: Optional[int] = None) -> bool:
        if not path:
            return False
        t = self.radius if t is None else t
        cs = set()
        for v in path:
            a = self.assignment[v]
            if a is None or a[1] > t:
                return False
            cs.add(a[0])
        return len(cs) == 1

    def is_almost_uniform(self, path: Sequence[int], t: Optional[int] = None) -> bool:
        return len(path) >= 2 and self.is_uniform(path[:-1], t)


def fnc_clustering(graph: Graph, matching: Matching, r: int) -> Clustering:
    centers = tuple(matching.free_nodes())
    assignment: list = [None] * graph.n
    for f in centers:
        assignment[f] = (f, 0)
    for t in range(1, r + 1):
        candidates: dict[int, int] = {}
        for f in centers:
            inside = {v for v, a in enumerate(assignment) if a is not None and a[0] == f}
            for path in alternating_paths(graph, matching, f, inside, t - 1):
                if len(path) - 1 != t - 1:
                    continue
                x, lk = path[-1], last_kind(matching, path)
                for v in graph.adj[x]:
                    if assignment[v] is not None:
                        continue
                    if matching.kind(x, v) == lk:
                        continue
                    if v not in candidates or f < candidates[v]:
                        candidates[v] = f
        for v, f in candidates.items():
            assignment[v] = (f, t)
    return Clustering(graph.n, r, centers, assignment)


@dataclass
class ReachabilityTable:
    radius: int
    reach0: list
    reach1: list
    pred: list
    cid: list

    def reach(self, v: int, theta: Optional[int] = None) -> Optional[int]:
        if theta == ZERO_EDGE:
            return self.reach0[v]
        if theta == ONE_EDGE:
            return self.reach1[v]
        vals = [x for x in (self.reach0[v], self.reach1[v]) if x is not None]
        return min(vals) if vals else None

    def truncate(self, r: int) -> "ReachabilityTable":
        """Values of the same instance at a smaller radius.

        A uniform path of length ``l <= r`` in the larger clustering is
        already uniform after ``l`` steps, so capping is exact.
        """
        cap = lambda x: x if x is not None and x <= r else None  # noqa: E731
        r0 = [cap(x) for x in self.reach0]
        r1 = [cap(x) for x in self.reach1]
        pred, cid = [], []
        for v in range(len(r0)):
            joined = r0[v] is not None or r1[v] is not None
            pred.append(self.pred[v] if joined else frozenset())
            cid.append(self.cid[v] if joined else None)
        return ReachabilityTable(r, r0, r1, pred, cid)

    def rows(self) -> list[tuple]:
        """Per-node ``(cid, pred, r0, r1)`` tuples."""
        return [(self.cid[v], self.pred[v], self.reach0[v], self.reach1[v])
                for v in range(len(self.cid))]


def reachability_table(graph: Graph, matching: Matching, clustering: Clustering,
                       r: Optional[int] = None) -> ReachabilityTable:
    r = clustering.radius if r is None else r
    if r > clustering.radius:
        raise ValueError("reachability radius exceeds the clustering radius")
    n = graph.n
    best: dict[tuple[int, int], int] = {}
    preds: dict[tuple[int, int], set] = {}
    for f in clustering.centers:
        inside = clustering.members(f)
        for path in alternating_paths(graph, matching, f, inside, r):
            if len(path) < 2:
                continue
            key = (path[-1], last_kind(matching, path))
            length = len(path) - 1
            old = best.get(key)
            if old is None or length < old:
                best[key] = length
                preds[key] = {path[-2]}
            elif length == old:
                preds[key].add(path[-2])
    reach0: list = [None] * n
    reach1: list = [None] * n
    pred: list = [frozenset()] * n
    cid: list = [None] * n
    for v in range(n):
        if matching.is_free(v):
            reach0[v] = reach1[v] = 0
            cid[v] = v
            continue
        reach0[v] = best.get((v, ZERO_EDGE))
        reach1[v] = best.get((v, ONE_EDGE))
        vals = [(x, k) for k, x in ((ZERO_EDGE, reach0[v]), (ONE_EDGE, reach1[v])) if x is not None]
        if vals:
            shortest = min(x for x, _ in vals)
            pset = set()
            for x, k in vals:
                if x == shortest:
                    pset |= preds[(v, k)]
            pred[v] = frozenset(pset)
            cid[v] = clustering.center(v)
    return ReachabilityTable(r, reach0, reach1, pred, cid)


# -- analytics on paths and walks ---------------------------------------------


def _need(x, what):
    if x is None:
        raise UndefinedReachability(what)
    return x


def delay(matching: Matching, table: ReachabilityTable, walk: Sequence[int], i: int) -> int:
    """Delay contributed by ``walk[i]``: ``r1 - r0`` when both of its walk
    edges are unmatched, else 0."""
    if i == 0 or i == len(walk) - 1:
        return 0
    v = walk[i]
    if matching.kind(walk[i - 1], v) == ZERO_EDGE and matching.kind(v, walk[i + 1]) == ZERO_EDGE:
        r0 = _need(table.reach0[v], f"node {v} has no finite 0-reachability")
        r1 = _need(table.reach1[v], f"node {v} has no finite 1-reachability")
        return r1 - r0
    return 0


@dataclass(frozen=True)
class PathMetrics:
    length: int
    delays: tuple[int, ...]
    promoted_length: int


def path_metrics(graph: Graph, matching: Matching, table: ReachabilityTable,
                 walk: Sequence[int]) -> PathMetrics:
    for a, b in zip(walk, walk[1:]):
        if not graph.has_edge(a, b):
            raise ValueError(f"({a}, {b}) is not an edge")
    d = tuple(delay(matching, table, walk, i) for i in range(len(walk)))
    return PathMetrics(len(walk) - 1, d, len(walk) - 1 + sum(d))


def tenacity(table: ReachabilityTable, v: int) -> int:
    r0 = _need(table.reach0[v], f"node {v} has no finite 0-reachability")
    r1 = _need(table.reach1[v], f"node {v} has no finite 1-reachability")
    return r0 + r1


def edge_tenacity(matching: Matching, table: ReachabilityTable, edge: Sequence[int]) -> int:
    u, w = edge
    other = 1 - matching.kind(u, w)
    lu = _need(table.reach(u, other), f"node {u} lacks {other}-reachability")
    lw = _need(table.reach(w, other), f"node {w} lacks {other}-reachability")
    return lu + lw + 1


def shortcuts(table: ReachabilityTable, v: int, cap: int = 10_000) -> list[list[int]]:
    """All predecessor chains from ``v`` down to its cluster center."""
    out: list[list[int]] = []

    def walk(path):
        if len(out) >= cap:
            return
        x = path[-1]
        if not table.pred[x]:
            out.append(list(path))
            return
        for p in sorted(table.pred[x]):
            path.append(p)
            walk(path)
            path.pop()

    walk([v])
    return out


def shortest_uniform_paths(graph: Graph, matching: Matching, clustering: Clustering,
                           v: int, theta: int, r: Optional[int] = None) -> list[list[int]]:
    """All shortest uniform ``theta``-paths of ``v`` (test support)."""
    r = clustering.radius if r is None else r
    f = clustering.center(v)
    if f is None:
        return []
    found: list[list[int]] = []
    best = None
    for path in alternating_paths(graph, matching, f, clustering.members(f), r):
        if path[-1] != v or len(path) < 2 or last_kind(matching, path) != theta:
            continue
        length = len(path) - 1
        if best is None or length < best:
            best, found = length, [list(path)]
        elif length == best:
            found.append(list(path))
    return found


@dataclass
class FncResult:
    clustering: Clustering
    table: ReachabilityTable


def fnc(graph: Graph, matching: Matching, r: int) -> FncResult:
    c = fnc_clustering(graph, matching, r)
    return FncResult(c, reachability_table(graph, matching, c, r))
