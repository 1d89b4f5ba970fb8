"""Brute-force ground truth for augmenting paths.

Nothing clever happens here on purpose: shortest augmenting paths are
found by exhaustive depth-limited search over simple alternating paths,
with the length bound raised two at a time.  No blossom shrinking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .graphcore import Graph, Matching, augment, validate_matching
from .fnc import Clustering

PATH_CAP = 100_000


class PathSetOverflow(RuntimeError):
    pass


class MatchingMaximum(ValueError):
    pass


@dataclass
class OracleResult:
    shortest_aug_len: Optional[int]
    all_shortest_paths: list = field(default_factory=list)
    complete: bool = True
    max_matching_size: Optional[int] = None

    @property
    def is_maximum(self) -> bool:
        return self.shortest_aug_len is None


def _search(graph: Graph, matching: Matching, length: int, collect: bool, cap: int):
    """Augmenting paths of exactly ``length`` edges.

    Returns ``(found_any, paths, overflow)``; each path is reported once,
    oriented so that its first node is the smaller endpoint.
    """
    mate = matching.mate
    adj = graph.adj
    paths: list[tuple[int, ...]] = []
    seen: set = set()
    overflow = False
    found = False

    for s in matching.free_nodes():
        path = [s]
        on = {s}

        def extend(x) -> bool:
            # ``x`` was just reached over an unmatched edge
            nonlocal overflow, found
            k = len(path) - 1
            if mate[x] is None:
                if k == length:
                    found = True
                    if not collect:
                        return True
                    if path[0] < path[-1]:
                        t = tuple(path)
                        if t not in seen:
                            if len(paths) >= cap:
                                overflow = True
                                return True
                            seen.add(t)
                            paths.append(t)
                return False
            if k + 2 > length:
                return False
            y = mate[x]
            if y in on:
                return False
            path.append(y)
            on.add(y)
            for z in adj[y]:
                if z in on or z == mate[y]:
                    continue
                path.append(z)
                on.add(z)
                stop = extend(z)
                path.pop()
                on.discard(z)
                if stop:
                    break
            else:
                stop = False
            path.pop()
            on.discard(y)
            return stop

        for z in adj[s]:
            if z in on:
                continue
            path.append(z)
            on.add(z)
            stop = extend(z)
            path.pop()
            on.discard(z)
            if stop:
                return found, paths, overflow
    return found, paths, overflow


def shortest_augmenting(graph: Graph, matching: Matching, len_cap: Optional[int] = None,
                        want_paths: bool = True, cap: int = PATH_CAP) -> OracleResult:
    """Length of a shortest augmenting path and (optionally) all of them.

    ``len_cap`` defaults to ``2|M| + 1``, the longest an augmenting path can be.
    If more than ``cap`` shortest paths exist the list is truncated and
    ``complete`` is False.
    """
    if len_cap is None:
        len_cap = 2 * len(matching) + 1
    if len(matching.free_nodes()) < 2:
        return OracleResult(None)
    for length in range(1, len_cap + 1, 2):
        found, paths, overflow = _search(graph, matching, length, want_paths, cap)
        if found:
            return OracleResult(length, paths, complete=want_paths and not overflow)
    return OracleResult(None)


def shortest_augmenting_strict(graph: Graph, matching: Matching, **kw) -> OracleResult:
    """Like :func:`shortest_augmenting` but raises :class:`PathSetOverflow`."""
    res = shortest_augmenting(graph, matching, **kw)
    if not res.complete:
        raise PathSetOverflow(f"more than {kw.get('cap', PATH_CAP)} shortest paths")
    return res


def find_augmenting_path(graph: Graph, matching: Matching) -> Optional[tuple[int, ...]]:
    res = shortest_augmenting(graph, matching, want_paths=True, cap=1)
    if res.shortest_aug_len is None:
        return None
    return res.all_shortest_paths[0]


def maximum_matching(graph: Graph, start: Optional[Matching] = None) -> Matching:
    m = start if start is not None else validate_matching(graph, [])
    while True:
        p = find_augmenting_path(graph, m)
        if p is None:
            return m
        m = augment(m, p)


def maximum_matching_size(graph: Graph, start: Optional[Matching] = None) -> int:
    return len(maximum_matching(graph, start))


def path_between(graph: Graph, matching: Matching, a: int, b: int, length: int) -> Optional[tuple]:
    """Some augmenting path of exactly ``length`` edges with endpoints ``{a, b}``."""
    _, paths, _ = _search(graph, matching, length, True, PATH_CAP)
    for p in paths:
        if {p[0], p[-1]} == {a, b}:
            return p
    return None


def rank_of(path: Sequence[int], clustering: Clustering) -> int:
    """``i + j`` for the longest prefix (``i`` edges) in the cluster of the
    first endpoint and the longest suffix (``j`` edges) in the cluster of
    the last endpoint."""
    first, last = clustering.center(path[0]), clustering.center(path[-1])
    i = 0
    while i + 1 < len(path) and clustering.center(path[i + 1]) == first:
        i += 1
    j = 0
    while j + 1 < len(path) and clustering.center(path[-2 - j]) == last:
        j += 1
    return i + j


def hk_bound_check(graph: Graph, matching: Matching, s_star: Optional[int] = None,
                   ell: Optional[int] = None) -> bool:
    """``ell < 2 s* / (s* - |M|)`` for the shortest augmenting length ``ell``."""
    if s_star is None:
        s_star = maximum_matching_size(graph, matching)
    if s_star == len(matching):
        raise MatchingMaximum("the matching is already maximum")
    if ell is None:
        ell = shortest_augmenting(graph, matching, want_paths=False).shortest_aug_len
    return Fraction(ell) < Fraction(2 * s_star, s_star - len(matching))


def oracle(graph: Graph, matching: Matching, want_paths: bool = True) -> OracleResult:
    res = shortest_augmenting(graph, matching, want_paths=want_paths)
    res.max_matching_size = maximum_matching_size(graph, matching)
    return res
