"""Instance families for tests and campaigns.

Every generator returns ``(Graph, Matching)`` and is deterministic in its
arguments.  The hand-built gadgets keep their documented node ids when
``seed == 0`` and are randomly relabelled otherwise, which exercises the
minimum-id tie-breaks without changing the structure.
"""

from __future__ import annotations

import random
from typing import Callable, Optional

from .graphcore import Graph, Matching, validate_matching
from .oracle import maximum_matching


class InvalidParams(ValueError):
    pass


def _rng(seed: int, salt: str) -> random.Random:
    return random.Random(f"{salt}:{seed}")


def random_edges(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if m > len(pairs):
        raise InvalidParams(f"{m} edges do not fit on {n} nodes")
    return sorted(rng.sample(pairs, m))


def greedy_matching(graph: Graph, rng: random.Random, accept: float = 1.0) -> Matching:
    """Scan edges in random order, taking each free edge with probability
    ``accept``.  ``accept=1`` gives a random maximal matching."""
    edges = list(graph.edges)
    rng.shuffle(edges)
    used: set = set()
    chosen = []
    for u, v in edges:
        if u in used or v in used:
            continue
        if accept < 1.0 and rng.random() >= accept:
            continue
        chosen.append((u, v))
        used.update((u, v))
    return validate_matching(graph, chosen)


def relabel(graph: Graph, matching: Matching, perm: list[int]) -> tuple[Graph, Matching]:
    g = Graph.from_edges(graph.n, [(perm[u], perm[v]) for u, v in graph.edges])
    return g, validate_matching(g, [(perm[u], perm[v]) for u, v in matching.edges])


def _maybe_relabel(graph, matching, seed):
    if seed == 0:
        return graph, matching
    perm = list(range(graph.n))
    _rng(seed, "relabel").shuffle(perm)
    return relabel(graph, matching, perm)


def _build(n, edges, matched):
    g = Graph.from_edges(n, edges)
    return g, validate_matching(g, matched)


# -- random families -------------------------------------------------------------


def random_gnm(n: int, seed: int = 0, m: Optional[int] = None) -> tuple[Graph, Matching]:
    """``G(n, m)`` with ``m`` drawn from ``[n-1, 2n]`` unless given.

    The matching depends on ``seed % 4``: 0 -- a maximum matching,
    1 -- a random (usually non-maximal) matching, otherwise a random
    maximal matching.
    """
    if n < 1:
        raise InvalidParams("n must be positive")
    rng = _rng(seed, f"gnm:{n}")
    cap = n * (n - 1) // 2
    if m is None:
        m = rng.randint(min(n - 1, cap), min(2 * n, cap))
    g = Graph.from_edges(n, random_edges(n, m, rng))
    style = seed % 4
    if style == 1:
        return g, greedy_matching(g, rng, accept=0.5)
    base = greedy_matching(g, rng)
    if style == 0:
        return g, maximum_matching(g, base)
    return g, base


def random_with_random_matching(n: int, seed: int = 0, m: Optional[int] = None,
                                accept: float = 0.5) -> tuple[Graph, Matching]:
    rng = _rng(seed, f"gnm-rm:{n}")
    cap = n * (n - 1) // 2
    if m is None:
        m = rng.randint(min(n - 1, cap), min(2 * n, cap))
    g = Graph.from_edges(n, random_edges(n, m, rng))
    return g, greedy_matching(g, rng, accept=accept)


def path(n: int, seed: int = 0) -> tuple[Graph, Matching]:
    """The path ``0 - 1 - ... - n-1`` with a random matching."""
    if n < 1:
        raise InvalidParams("n must be positive")
    g = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    return g, greedy_matching(g, _rng(seed, f"path:{n}"), accept=0.6)


def even_path_perfect(n: int, seed: int = 0) -> tuple[Graph, Matching]:
    if n < 2 or n % 2:
        raise InvalidParams("even_path_perfect needs an even n >= 2")
    g = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    return g, validate_matching(g, [(i, i + 1) for i in range(0, n, 2)])


# -- gadgets -----------------------------------------------------------------------

FIG1_NAMES = {"f": 0, "a": 1, "b": 2, "u": 3, "v": 4, "c": 5, "w": 6}


def fig1_gadget(n: Optional[int] = None, seed: int = 0) -> tuple[Graph, Matching]:
    """Seven nodes; the shortest alternating path from the free node ``f``
    reaches ``u`` in 3 steps but ``v`` only in 5 (via ``w``)."""
    N = FIG1_NAMES
    edges = [("f", "a"), ("a", "b"), ("b", "u"), ("u", "v"), ("v", "c"), ("b", "w"), ("w", "u")]
    matched = [("a", "b"), ("v", "c"), ("w", "u")]
    g, m = _build(7, [(N[x], N[y]) for x, y in edges], [(N[x], N[y]) for x, y in matched])
    return _maybe_relabel(g, m, seed)


FIG2_NAMES = {k: i for i, k in enumerate("f A z B C v w D E F G H I".split())}


def fig2_gadget(variant: str = "a", seed: int = 0) -> tuple[Graph, Matching]:
    """Node ``w`` closes a 1-path of length 4.  In variant ``a`` a detour
    through ``H, I`` creates an odd cycle with stem ``z`` that gives ``w`` a
    0-path of length 9; variant ``b`` lacks the detour and ``w`` has no
    0-path at all."""
    N = dict(FIG2_NAMES)
    edges = [("f", "A"), ("A", "z"), ("z", "B"), ("B", "C"), ("C", "v"), ("B", "w"),
             ("w", "D"), ("E", "w"), ("D", "F"), ("F", "G"), ("G", "E")]
    matched = [("A", "z"), ("C", "v"), ("B", "w"), ("D", "F"), ("G", "E")]
    if variant == "a":
        edges += [("z", "H"), ("H", "I"), ("I", "D")]
        matched += [("H", "I")]
    elif variant == "b":
        del N["H"], N["I"]
    else:
        raise InvalidParams("variant must be 'a' or 'b'")
    g, m = _build(len(N), [(N[x], N[y]) for x, y in edges], [(N[x], N[y]) for x, y in matched])
    return _maybe_relabel(g, m, seed)


def nested_odd_cycles(depth: int = 2, seed: int = 0, exit: Optional[bool] = None
                      ) -> tuple[Graph, Matching]:
    """A chain of ``depth`` 5-cycles, each hanging off the previous one.

    Free node ``f`` (0) is joined by an unmatched edge to ``x`` (1), which
    is matched to the first stem.  Cycle ``k`` is
    ``s -0- a =1= b -0- c =1= d -0- s`` and the stem of cycle ``k + 1`` is
    ``b`` of cycle ``k``.  With ``exit`` a second free node hangs off ``c``
    of the innermost cycle, creating an augmenting path that threads
    every cycle; by default the exit is present for even seeds.
    """
    if depth < 1:
        raise InvalidParams("depth must be at least 1")
    if exit is None:
        exit = seed % 2 == 0
    edges, matched = [(0, 1)], []
    stem = 2
    edges.append((1, stem))
    matched.append((1, stem))
    nxt = 3
    last_c = None
    for _ in range(depth):
        a, b, c, d = nxt, nxt + 1, nxt + 2, nxt + 3
        nxt += 4
        edges += [(stem, a), (a, b), (b, c), (c, d), (d, stem)]
        matched += [(a, b), (c, d)]
        stem, last_c = b, c
    n = nxt
    if exit:
        edges.append((last_c, n))
        n += 1
    g, m = _build(n, edges, matched)
    return _maybe_relabel(g, m, seed)


def interlocked_cycles(n: int = 13, seed: int = 0, exit: Optional[bool] = None
                       ) -> tuple[Graph, Matching]:
    """Several odd cycles with one shared matched middle edge ``p = q``.

    ``f -0- x =1= s``; ``s`` reaches ``p`` through ``kl`` branches
    ``s -0- a =1= b -0- p`` and ``q`` through ``kr`` branches
    ``s -0- d =1= c -0- q``.  Any left and right branch together with the
    middle edge form a 7-cycle with stem ``s``.  With ``exit`` a second
    free node hangs off ``p``.
    """
    if exit is None:
        exit = seed % 2 == 0
    budget = n - 5 - (1 if exit else 0)
    if budget < 4:
        raise InvalidParams("interlocked_cycles needs n >= 9 (10 with an exit)")
    branches = budget // 2
    rng = _rng(seed, f"interlocked:{n}")
    kl = rng.randint(1, branches - 1)
    kr = branches - kl
    f, x, s, p, q = 0, 1, 2, 3, 4
    edges = [(f, x), (x, s), (p, q)]
    matched = [(x, s), (p, q)]
    nxt = 5
    for end, count in ((p, kl), (q, kr)):
        for _ in range(count):
            a, b = nxt, nxt + 1
            nxt += 2
            edges += [(s, a), (a, b), (b, end)]
            matched.append((a, b))
    total = nxt
    if exit:
        edges.append((p, total))
        total += 1
    g, m = _build(total, edges, matched)
    return _maybe_relabel(g, m, seed)


FAMILIES: dict[str, Callable[..., tuple[Graph, Matching]]] = {
    "random_gnm": lambda n, seed: random_gnm(n, seed),
    "path": lambda n, seed: path(n, seed),
    "even_path_perfect": lambda n, seed: even_path_perfect(n, seed),
    "fig1_gadget": lambda n, seed: fig1_gadget(seed=seed),
    "nested_odd_cycles": lambda n, seed: nested_odd_cycles(depth=max(1, (n - 3) // 4), seed=seed),
    "interlocked_cycles": lambda n, seed: interlocked_cycles(n=max(n, 10), seed=seed),
    "random_with_random_matching": lambda n, seed: random_with_random_matching(n, seed),
    "fig2a_gadget": lambda n, seed: fig2_gadget("a", seed),
    "fig2b_gadget": lambda n, seed: fig2_gadget("b", seed),
}


def generate(family: str, n: int = 12, seed: int = 0) -> tuple[Graph, Matching]:
    """Instance of ``family``; ``n`` is a size hint for the gadget families
    (the nested cycles use depth ``(n - 3) // 4``)."""
    try:
        make = FAMILIES[family]
    except KeyError:
        raise InvalidParams(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    return make(n, seed)
