"""Property tests over small random instances."""

import random

from hypothesis import given
from hypothesis import strategies as st

from matchverify.congest import default_bit_budget
from matchverify.dfnc import run_dfnc
from matchverify.fnc import fnc, path_metrics, shortcuts, shortest_uniform_paths
from matchverify.generators import greedy_matching
from matchverify.graphcore import (ONE_EDGE, Graph, augment, edge_kind, format_graph,
                                   format_matching, is_augmenting, parse_graph, parse_matching)
from matchverify.oracle import hk_bound_check, maximum_matching_size, shortest_augmenting
from matchverify.ring import run_ring
from matchverify.verifier import maximal_matching_distributed, verify


@st.composite
def instances(draw, max_n=10):
    n = draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=2 * n))
    g = Graph.from_edges(n, edges)
    rng = random.Random(draw(st.integers(0, 2**32)))
    m = greedy_matching(g, rng, accept=draw(st.sampled_from([0.3, 0.7, 1.0])))
    return g, m


@given(instances())
def test_edge_kinds_partition(inst):
    g, m = inst
    ones = [e for e in g.edges if edge_kind(m, e) == ONE_EDGE]
    assert sorted(ones) == m.sorted_edges()


@given(instances())
def test_augmenting_adds_one_edge(inst):
    g, m = inst
    res = shortest_augmenting(g, m, cap=5)
    for p in res.all_shortest_paths:
        assert is_augmenting(g, m, p)
        assert len(augment(m, p)) == len(m) + 1


@given(instances())
def test_berge(inst):
    g, m = inst
    res = shortest_augmenting(g, m, want_paths=False)
    assert res.is_maximum == (len(m) == maximum_matching_size(g))


@given(instances())
def test_instance_text_roundtrip(inst):
    g, m = inst
    g2 = parse_graph(format_graph(g))
    assert g2 == g
    assert parse_matching(g2, format_matching(m)).sorted_edges() == m.sorted_edges()


@given(instances())
def test_reachability_parity_and_join_round(inst):
    g, m = inst
    res = fnc(g, m, 2 * g.n)
    t, c = res.table, res.clustering
    for v in range(g.n):
        if m.is_free(v):
            continue
        assert t.reach0[v] is None or t.reach0[v] % 2 == 1
        assert t.reach1[v] is None or t.reach1[v] % 2 == 0
        assert c.join_round(v) == t.reach(v)
        if t.pred[v]:
            kinds = {m.kind(v, p) for p in t.pred[v]}
            assert len(kinds) == 1


@given(instances(), st.integers(0, 20))
def test_clustering_only_grows(inst, r):
    g, m = inst
    small, big = fnc(g, m, r).clustering, fnc(g, m, r + 1).clustering
    for v in range(g.n):
        if small.center(v) is not None:
            assert big.center(v) == small.center(v)
            assert big.join_round(v) == small.join_round(v)


@given(instances(max_n=8))
def test_shortest_uniform_paths_are_uniform(inst):
    g, m = inst
    c = fnc(g, m, 2 * g.n).clustering
    for v in range(g.n):
        for theta in (0, 1):
            for p in shortest_uniform_paths(g, m, c, v, theta):
                assert c.is_uniform(p, len(p) - 1)


@given(instances())
def test_promoted_length_of_shortcuts(inst):
    g, m = inst
    t = fnc(g, m, 2 * g.n).table
    for v in range(g.n):
        if t.reach(v) is None:
            continue
        for s in shortcuts(t, v, cap=20):
            assert path_metrics(g, m, t, s).promoted_length == t.reach(v)


@given(instances())
def test_dfnc_equals_reference_at_every_radius(inst):
    g, m = inst
    big = fnc(g, m, 2 * g.n).table
    run = run_dfnc(g, m, 2 * g.n, snapshots=True, record=False)
    for r, regs in enumerate(run.snapshots):
        assert regs == big.truncate(r).rows()


@given(instances())
def test_token_parity_and_count(inst):
    g, m = inst
    run = run_dfnc(g, m, 2 * g.n)
    rounds_by_node: dict = {}
    for rec in run.trace.rounds:
        for msg in rec["messages"]:
            if "token" not in msg["payload"]:
                continue
            src, dst, t = msg["src"], msg["dst"], rec["round"]
            rounds_by_node.setdefault(src, set()).add(t)
            if m.contains(src, dst):
                assert t % 2 == 0
            else:
                assert t % 2 == 1
    assert all(len(ts) <= 2 for ts in rounds_by_node.values())


@given(instances(), st.integers(0, 1000))
def test_ring_agrees_with_rational(inst, seed):
    g, m = inst
    ref = run_dfnc(g, m, 2 * g.n, record=False).registers()
    got = run_ring(g, m, 2 * g.n, gamma_exp=6, seed=seed, record=False,
                   bit_budget=default_bit_budget(g.n))
    assert got.registers() == ref


@given(instances())
def test_verify_matches_oracle(inst):
    g, m = inst
    v = verify(g, m)
    ell = shortest_augmenting(g, m, want_paths=False).shortest_aug_len
    assert v.ell == ell
    if ell is not None:
        assert hk_bound_check(g, m, ell=ell)


@given(instances())
def test_maximal_matching(inst):
    g, _ = inst
    res = maximal_matching_distributed(g)
    mm = res.matching
    assert all(not (mm.is_free(u) and mm.is_free(v)) for u, v in g.edges)
    assert 2 * res.size >= maximum_matching_size(g)
    assert res.known_size == [res.size] * g.n


@given(instances(max_n=8), st.integers(0, 50))
def test_ring_runs_are_reproducible(inst, seed):
    g, m = inst
    a = run_ring(g, m, g.n, seed=seed).trace.to_jsonl()
    assert a == run_ring(g, m, g.n, seed=seed).trace.to_jsonl()
