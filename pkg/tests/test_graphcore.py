import pytest

from matchverify.graphcore import (ONE_EDGE, ZERO_EDGE, EdgeNotInGraph, Graph, GraphError,
                                   NonDisjointEdges, NotAugmenting, augment, edge_kind,
                                   format_graph, format_matching, is_alternating_path,
                                   is_augmenting, parse_graph, parse_matching, path_edges,
                                   read_instance, validate_matching, write_instance)

A, B, C = 0, 1, 2


def path3():
    return Graph.from_edges(3, [(A, B), (B, C)])


def test_matching_on_path():
    m = validate_matching(path3(), [(A, B)])
    assert len(m) == 1
    assert m.mate[A] == B and m.mate[B] == A and m.is_free(C)
    assert m.free_nodes() == [C]


def test_shared_endpoint_rejected():
    with pytest.raises(NonDisjointEdges) as info:
        validate_matching(path3(), [(A, B), (B, C)])
    assert info.value.node == B


def test_empty_matching_on_triangle():
    tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    m = validate_matching(tri, [])
    assert len(m) == 0 and m.free_nodes() == [0, 1, 2]


def test_edge_outside_graph_rejected():
    with pytest.raises(EdgeNotInGraph):
        validate_matching(path3(), [(A, C)])


def test_graph_rejects_loops_and_duplicates():
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(GraphError):
        Graph.from_edges(2, [(0, 2)])


def test_edge_kinds():
    g = path3()
    m = validate_matching(g, [(A, B)])
    assert edge_kind(m, (A, B)) == ONE_EDGE
    assert edge_kind(m, (B, C)) == ZERO_EDGE
    assert edge_kind(validate_matching(g, []), (B, C)) == ZERO_EDGE


def test_augmenting_paths():
    g = Graph.from_edges(2, [(0, 1)])
    assert is_augmenting(g, validate_matching(g, []), [0, 1])
    p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])  # f - a = b - f'
    m = validate_matching(p4, [(1, 2)])
    assert is_augmenting(p4, m, [0, 1, 2, 3])
    assert not is_augmenting(p4, m, [0, 1, 2])
    assert is_alternating_path(p4, m, [0, 1, 2])


def test_augment_is_symmetric_difference():
    p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(p4, [(1, 2)])
    m2 = augment(m, [0, 1, 2, 3])
    assert m2.sorted_edges() == [(0, 1), (2, 3)]
    assert len(m2) == len(m) + 1
    g = Graph.from_edges(2, [(0, 1)])
    assert augment(validate_matching(g, []), [0, 1]).sorted_edges() == [(0, 1)]


def test_augment_rejects_non_augmenting():
    p4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(p4, [(1, 2)])
    with pytest.raises(NotAugmenting):
        augment(m, [0, 1, 2])


def test_path_edges_normalised():
    assert path_edges([3, 1, 2]) == [(1, 3), (1, 2)]


def test_components_and_induced():
    g = Graph.from_edges(5, [(0, 1), (3, 4)])
    assert g.components() == [[0, 1], [2], [3, 4]]
    assert not g.is_connected()
    sub, back = g.induced([3, 4])
    assert sub.n == 2 and sub.edges == ((0, 1),) and back == [3, 4]


def test_instance_roundtrip(tmp_path):
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(g, [(1, 2)])
    assert parse_graph(format_graph(g)) == g
    assert parse_matching(g, format_matching(m)).sorted_edges() == [(1, 2)]
    write_instance(g, m, tmp_path / "g.txt", tmp_path / "m.txt")
    g2, m2 = read_instance(tmp_path / "g.txt", tmp_path / "m.txt")
    assert g2 == g and m2.sorted_edges() == m.sorted_edges()


def test_graph_header_mismatch():
    with pytest.raises(GraphError):
        parse_graph("3 2\n0 1\n")
