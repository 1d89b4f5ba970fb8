"""Graphs, matchings and alternating paths.

Node ids are dense integers ``0..n-1``.  An edge is stored as a sorted
pair ``(u, v)`` with ``u < v``.  Both :class:`Graph` and :class:`Matching`
are immutable value objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

ZERO_EDGE = 0
ONE_EDGE = 1

Edge = tuple[int, int]


class GraphError(ValueError):
    pass


class EdgeNotInGraph(GraphError):
    def __init__(self, edge):
        super().__init__(f"edge {edge} is not in the graph")
        self.edge = edge


class NonDisjointEdges(GraphError):
    def __init__(self, node):
        super().__init__(f"node {node} is covered by two matched edges")
        self.node = node


class NotAugmenting(GraphError):
    pass


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``."""

    n: int
    edges: tuple[Edge, ...]
    adj: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    adjsets: tuple[frozenset, ...] = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        if n < 1:
            raise GraphError("a graph needs at least one node")
        seen = set()
        nbrs = [set() for _ in range(n)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            key = edge_key(u, v)
            if key in seen:
                raise GraphError(f"parallel edge {key}")
            seen.add(key)
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(
            n,
            tuple(sorted(seen)),
            tuple(tuple(sorted(s)) for s in nbrs),
            tuple(frozenset(s) for s in nbrs),
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
            return False
        return v in self.adjsets[u]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest member."""
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [s], [s]
            while stack:
                x = stack.pop()
                for y in self.adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        comp.append(y)
                        stack.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def induced(self, nodes: Sequence[int]) -> tuple["Graph", list[int]]:
        """Subgraph on ``nodes`` relabelled densely in ascending order.

        Returns the subgraph and the list mapping new id -> old id.
        """
        order = sorted(nodes)
        index = {old: new for new, old in enumerate(order)}
        sub = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return Graph.from_edges(len(order), sub), order


@dataclass(frozen=True)
class Matching:
    """A validated set of pairwise node-disjoint edges of ``graph``."""

    graph: Graph
    edges: frozenset
    mate: tuple = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def size(self) -> int:
        return len(self.edges)

    def is_free(self, v: int) -> bool:
        return self.mate[v] is None

    def free_nodes(self) -> list[int]:
        return [v for v in range(self.graph.n) if self.mate[v] is None]

    def contains(self, u: int, v: int) -> bool:
        return self.mate[u] == v

    def kind(self, u: int, v: int) -> int:
        """Edge kind of ``{u, v}``: ``ONE_EDGE`` if matched, else ``ZERO_EDGE``."""
        return ONE_EDGE if self.mate[u] == v else ZERO_EDGE

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def validate_matching(graph: Graph, edge_set: Iterable[Sequence[int]]) -> Matching:
    mate: list = [None] * graph.n
    keys = set()
    for e in edge_set:
        u, v = int(e[0]), int(e[1])
        if not graph.has_edge(u, v):
            raise EdgeNotInGraph((u, v))
        key = edge_key(u, v)
        if key in keys:
            continue
        for x in key:
            if mate[x] is not None:
                raise NonDisjointEdges(x)
        mate[u], mate[v] = v, u
        keys.add(key)
    return Matching(graph, frozenset(keys), tuple(mate))


def edge_kind(matching: Matching, edge: Sequence[int]) -> int:
    u, v = int(edge[0]), int(edge[1])
    if not matching.graph.has_edge(u, v):
        raise EdgeNotInGraph((u, v))
    return matching.kind(u, v)


def is_alternating_path(graph: Graph, matching: Matching, path: Sequence[int]) -> bool:
    """Simple path whose consecutive edges alternate between the two kinds."""
    if len(path) == 0:
        return False
    if len(set(path)) != len(path):
        return False
    if any(not (0 <= v < graph.n) for v in path):
        return False
    prev = None
    for a, b in zip(path, path[1:]):
        if not graph.has_edge(a, b):
            return False
        k = matching.kind(a, b)
        if prev is not None and k == prev:
            return False
        prev = k
    return True


def is_augmenting(graph: Graph, matching: Matching, path: Sequence[int]) -> bool:
    path = list(path)
    if len(path) < 2 or len(path) % 2 != 0:
        return False
    if not is_alternating_path(graph, matching, path):
        return False
    if not (matching.is_free(path[0]) and matching.is_free(path[-1])):
        return False
    # free endpoints force unmatched first and last edges
    return True


def augment(matching: Matching, path: Sequence[int]) -> Matching:
    if not is_augmenting(matching.graph, matching, path):
        raise NotAugmenting(f"{list(path)} is not an augmenting path")
    path_edges = {edge_key(a, b) for a, b in zip(path, path[1:])}
    return validate_matching(matching.graph, set(matching.edges) ^ path_edges)


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [edge_key(a, b) for a, b in zip(path, path[1:])]


# -- instance files ---------------------------------------------------------

def _data_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line.split()


def parse_graph(text: str) -> Graph:
    lines = list(_data_lines(text))
    if not lines:
        raise GraphError("empty graph file")
    n, m = int(lines[0][0]), int(lines[0][1])
    edges = [(int(a), int(b)) for a, b in lines[1:]]
    if len(edges) != m:
        raise GraphError(f"header announces {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def parse_matching(graph: Graph, text: str) -> Matching:
    return validate_matching(graph, [(int(a), int(b)) for a, b in _data_lines(text)])


def format_graph(graph: Graph) -> str:
    out = [f"{graph.n} {graph.m}"]
    out += [f"{u} {v}" for u, v in graph.edges]
    return "\n".join(out) + "\n"


def format_matching(matching: Matching) -> str:
    return "".join(f"{u} {v}\n" for u, v in matching.sorted_edges())


def read_instance(graph_path, matching_path=None) -> tuple[Graph, Matching]:
    graph = parse_graph(Path(graph_path).read_text())
    text = Path(matching_path).read_text() if matching_path else ""
    return graph, parse_matching(graph, text)


def write_instance(graph: Graph, matching: Matching, graph_path, matching_path) -> None:
    Path(graph_path).write_text(format_graph(graph))
    Path(matching_path).write_text(format_matching(matching))
