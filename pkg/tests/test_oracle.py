import networkx as nx
import pytest

from matchverify.fnc import fnc_clustering
from matchverify.generators import fig1_gadget, random_gnm
from matchverify.graphcore import Graph, augment, is_augmenting, validate_matching
from matchverify.oracle import (MatchingMaximum, PathSetOverflow, hk_bound_check,
                                maximum_matching, maximum_matching_size, oracle, path_between,
                                rank_of, shortest_augmenting, shortest_augmenting_strict)


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


def test_sizes():
    assert maximum_matching_size(Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])) == 1
    assert maximum_matching_size(Graph.from_edges(5, [(i, i + 1) for i in range(4)])) == 2


def test_petersen_perfect():
    g = petersen()
    m = maximum_matching(g)
    assert len(m) == 5
    assert validate_matching(g, [(i, i + 5) for i in range(5)]).size == 5  # the spokes


def test_empty_matching_gives_length_one():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    res = shortest_augmenting(g, validate_matching(g, []))
    assert res.shortest_aug_len == 1 and res.all_shortest_paths == [(0, 1), (1, 2)]


def test_fig1_is_maximum():
    g, m = fig1_gadget()
    assert shortest_augmenting(g, m).is_maximum


def test_p5_is_maximum():
    g = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    assert shortest_augmenting(g, validate_matching(g, [(1, 2), (3, 4)])).is_maximum


def test_paths_are_augmenting_and_shortest():
    for seed in range(30):
        g, m = random_gnm(9 + seed % 5, seed)
        res = shortest_augmenting(g, m)
        for p in res.all_shortest_paths:
            assert is_augmenting(g, m, p) and len(p) - 1 == res.shortest_aug_len
            assert p[0] < p[-1]
        assert len(set(res.all_shortest_paths)) == len(res.all_shortest_paths)


def test_overflow():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    m = validate_matching(g, [])
    res = shortest_augmenting(g, m, cap=2)
    assert not res.complete and len(res.all_shortest_paths) == 2
    with pytest.raises(PathSetOverflow):
        shortest_augmenting_strict(g, m, cap=2)


def test_path_between():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(g, [(1, 2)])
    assert path_between(g, m, 3, 0, 3) == (0, 1, 2, 3)
    assert path_between(g, m, 0, 3, 5) is None


def test_ranks():
    g = Graph.from_edges(2, [(0, 1)])
    m = validate_matching(g, [])
    assert rank_of((0, 1), fnc_clustering(g, m, 1)) == 0
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(g, [(1, 2)])
    assert rank_of((0, 1, 2, 3), fnc_clustering(g, m, 3)) == 2


def test_hk_bound():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert hk_bound_check(g, validate_matching(g, [(1, 2)]))  # 3 < 4
    assert hk_bound_check(g, validate_matching(g, []))        # 1 < 2
    with pytest.raises(MatchingMaximum):
        hk_bound_check(g, validate_matching(g, [(0, 1), (2, 3)]))


def test_oracle_bundle():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    res = oracle(g, validate_matching(g, [(1, 2)]))
    assert res.shortest_aug_len == 3 and res.max_matching_size == 2


def _nx_size(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return len(nx.max_weight_matching(h, maxcardinality=True))


def _nx_shortest(g, m):
    """Shortest augmenting length from networkx's simple-path enumeration."""
    best = None
    free = m.free_nodes()
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(g.n))
    for i, a in enumerate(free):
        for b in free[i + 1:]:
            for p in nx.all_simple_paths(h, a, b, cutoff=best or g.n):
                if is_augmenting(g, m, p) and (best is None or len(p) - 1 < best):
                    best = len(p) - 1
    return best


@pytest.mark.parametrize("seed", range(60))
def test_against_networkx(seed):
    g, m = random_gnm(5 + seed % 6, seed)
    assert maximum_matching_size(g, m) == _nx_size(g)
    assert shortest_augmenting(g, m, want_paths=False).shortest_aug_len == _nx_shortest(g, m)


def test_augmenting_repeatedly_reaches_the_maximum():
    g, m = random_gnm(14, 5)
    target = maximum_matching_size(g)
    while True:
        res = shortest_augmenting(g, m)
        if res.is_maximum:
            break
        m = augment(m, res.all_shortest_paths[0])
    assert len(m) == target
