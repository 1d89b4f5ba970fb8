"""Acceptance criteria 1-10 over the shared corpus.

Each test prints one ``criterion N: PASS|FAIL`` line (visible with ``-s``
or in the captured output of ``pytest -v``) before asserting.
"""

from collections import defaultdict
from fractions import Fraction

import pytest

from matchverify.congest import MessageTooLarge
from matchverify.dfnc import in_flight, run_dfnc
from matchverify.fnc import fnc, fnc_clustering, path_metrics, shortcuts
from matchverify.generators import FIG1_NAMES, fig1_gadget
from matchverify.oracle import (hk_bound_check, maximum_matching_size, path_between, rank_of,
                                shortest_augmenting)
from matchverify.ring import RingParams, run_ring
from matchverify.verifier import maximal_matching_distributed, verify

from corpus import RANDOM_COUNT, corpus

RING_RUNS = 5000
ROUND_CONSTANT = 64
MAXIMAL_CONSTANT = 32


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def runs():
    """Oracle answers and unbounded verdicts for every corpus instance."""
    out = []
    for name, g, m in corpus():
        o = shortest_augmenting(g, m)
        out.append({
            "name": name, "graph": g, "matching": m, "oracle": o,
            "s_star": maximum_matching_size(g, m),
            "verdict": verify(g, m, "unbounded"),
        })
    return out


def test_criterion_1_oracle_equivalence(runs, capsys):
    wrong = []
    for r in runs:
        g, m, o, v = r["graph"], r["matching"], r["oracle"], r["verdict"]
        if v.disproved != (not o.is_maximum) or v.ell != o.shortest_aug_len:
            wrong.append(r["name"])
        elif v.disproved and path_between(g, m, v.f, v.f_prime, v.ell) is None:
            wrong.append(r["name"])
    random_n = {r["graph"].n for r in runs[:RANDOM_COUNT]}
    ok = not wrong and RANDOM_COUNT >= 2000 and random_n == set(range(4, 25))
    report(capsys, 1, ok, f"{len(runs) - len(wrong)}/{len(runs)} verdicts agree with the oracle "
                          f"({sum(r['verdict'].disproved for r in runs)} disproved)")
    assert ok, wrong[:10]


def test_criterion_2_clustering_matches_reference(capsys):
    bad = []
    checked = 0
    for name, g, m in corpus():
        ref = fnc(g, m, 2 * g.n).table
        run = run_dfnc(g, m, 2 * g.n, snapshots=True, record=False)
        assert len(run.snapshots) == 2 * g.n + 1
        for r, regs in enumerate(run.snapshots):
            checked += 1
            if regs != ref.truncate(r).rows():
                bad.append((name, r))
                break
        if run.registers() != ref.rows():
            bad.append((name, "final"))
    report(capsys, 2, not bad, f"{checked} (instance, radius) register tables identical; "
                               f"{len(bad)} mismatches")
    assert not bad, bad[:10]


def _ring_mismatches(gamma_exp):
    items = corpus()
    ref = {}
    mismatches = 0
    for k in range(RING_RUNS):
        name, g, m = items[k % len(items)]
        if name not in ref:
            ref[name] = run_dfnc(g, m, 2 * g.n, record=False).registers()
        got = run_ring(g, m, 2 * g.n, gamma_exp=gamma_exp, seed=k, record=False)
        mismatches += got.registers() != ref[name]
    return mismatches


def test_criterion_3_ring_fidelity(capsys):
    fine = _ring_mismatches(6)
    stress = _ring_mismatches(2)
    rate, stress_rate = fine / RING_RUNS, stress / RING_RUNS
    ok = rate <= 1e-3 and stress_rate > rate
    report(capsys, 3, ok, f"mismatch rate {rate:.4g} at gamma=n^6, {stress_rate:.4g} at "
                          f"gamma=n^2 over {RING_RUNS} runs each")
    assert ok


def test_criterion_4_congest_compliance(runs, capsys):
    violations = []
    widest = 0
    disagreements = 0
    for i, r in enumerate(runs):
        g, m = r["graph"], r["matching"]
        try:
            v = verify(g, m, "ring", seed=i, gamma_exp=6)
        except MessageTooLarge as exc:
            violations.append((r["name"], str(exc)))
            continue
        widest = max(widest, v.max_bits)
        disagreements += v.ell != r["oracle"].shortest_aug_len
    report(capsys, 4, not violations,
           f"{len(violations)} MessageTooLarge in {len(runs)} bounded ring runs; widest message "
           f"{widest} bits; {disagreements} ring verdicts differ from the oracle")
    assert not violations, violations[:5]


def test_criterion_5_round_bounds(runs, capsys):
    worst_dis, worst_ver = Fraction(0), Fraction(0)
    over = []
    for r in runs:
        v = r["verdict"]
        if v.disproved:
            bound = v.tree_depth + v.ell + 1
            worst_dis = max(worst_dis, Fraction(v.rounds, bound))
        else:
            bound = len(r["matching"]) + v.tree_depth + 1
            worst_ver = max(worst_ver, Fraction(v.rounds, bound))
        if v.rounds > ROUND_CONSTANT * bound:
            over.append((r["name"], v.rounds, bound))
    report(capsys, 5, not over,
           f"fitted constants: rounds/(D_T+l+1) <= {float(worst_dis):.2f} (Disproved), "
           f"rounds/(|M|+D_T+1) <= {float(worst_ver):.2f} (Verified); budget {ROUND_CONSTANT}")
    assert not over, over[:5]


def test_criterion_6_fig1(capsys):
    g, m = fig1_gadget()
    t = fnc(g, m, 5).table
    u, v = FIG1_NAMES["u"], FIG1_NAMES["v"]
    got = (t.reach(u, 0), t.reach(v, 0))
    dist = run_dfnc(g, m, 5, record=False).states
    ok = got == (3, 5) and (dist[u].r0, dist[v].r0) == (3, 5)
    report(capsys, 6, ok, f"reach(u,0), reach(v,0) = {got}")
    assert ok


def test_criterion_7_rank_completeness(runs, capsys):
    checked, bad = 0, []
    for r in runs:
        o = r["oracle"]
        if o.is_maximum or not o.complete:
            continue
        g, m = r["graph"], r["matching"]
        c = fnc_clustering(g, m, 2 * g.n)
        checked += 1
        if max(rank_of(p, c) for p in o.all_shortest_paths) != o.shortest_aug_len - 1:
            bad.append(r["name"])
    ok = not bad and checked > 0
    report(capsys, 7, ok, f"max rank = l-1 on {checked - len(bad)}/{checked} instances with a "
                          f"complete shortest-path enumeration")
    assert ok, bad[:10]


def test_criterion_8_flow_conservation(capsys):
    keys = shortcut_checks = 0
    bad = []
    for name, g, m in corpus():
        run = run_dfnc(g, m, 4 * g.n, audit=True, record=False)
        if in_flight(run.states):
            bad.append((name, "flow still in flight"))
            continue
        a = run.audit
        total = defaultdict(Fraction)
        for node, key, _, val in a.discards:
            total[key] += val
        for node, key, _, val in a.absorbed:
            total[key] += val
        assigned = defaultdict(list)
        for node, key, _, val, when in a.assigned:
            assigned[(node, key)].append((when, val))
        for key in {e for e, *_ in a.generated}:
            keys += 1
            if total[key] != 1:
                bad.append((name, key, "unit not conserved"))
            drops = [d for d in a.discards if d[1] == key]
            if len(drops) > 1:
                bad.append((name, key, "discarded twice"))
            for node, _, rnd, val in drops:
                parts = assigned[(node, key)]
                if val != 1 or {w for w, _ in parts} != {rnd} or sum(x for _, x in parts) != 1:
                    bad.append((name, key, "discarding node saw the flow in several rounds"))
        table = fnc(g, m, 2 * g.n).table
        for v in range(0, g.n, 3):
            if table.reach(v) is None:
                continue
            for s in shortcuts(table, v, cap=20):
                shortcut_checks += 1
                if path_metrics(g, m, table, s).promoted_length != table.reach(v):
                    bad.append((name, v, "shortcut length"))
    report(capsys, 8, not bad, f"{keys} generated edges conserve exactly one unit; "
                               f"{shortcut_checks} shortcuts have promoted length = reachability")
    assert not bad, bad[:10]


def test_criterion_9_hopcroft_karp(runs, capsys):
    checked, bad = 0, []
    for r in runs:
        o = r["oracle"]
        if o.is_maximum:
            continue
        checked += 1
        if not hk_bound_check(r["graph"], r["matching"], r["s_star"], o.shortest_aug_len):
            bad.append(r["name"])
    ok = not bad and checked > 0
    report(capsys, 9, ok, f"l < 2s*/(s*-|M|) on {checked - len(bad)}/{checked} non-maximum "
                          f"instances")
    assert ok, bad[:10]


def test_criterion_10_maximal_matching(runs, capsys):
    bad = []
    worst = Fraction(0)
    for r in runs:
        g = r["graph"]
        s_star = r["s_star"]
        depth = r["verdict"].tree_depth
        res = maximal_matching_distributed(g)
        mm = res.matching
        if any(mm.is_free(u) and mm.is_free(v) for u, v in g.edges):
            bad.append((r["name"], "not maximal"))
        if 2 * res.size < s_star:
            bad.append((r["name"], "too small"))
        bound = s_star + depth + 1
        worst = max(worst, Fraction(res.rounds, bound))
        if res.rounds > MAXIMAL_CONSTANT * bound:
            bad.append((r["name"], "too slow", res.rounds, bound))
    report(capsys, 10, not bad, f"{len(runs)} maximal matchings, all maximal and >= s*/2; "
                                f"rounds/(s*+D_T+1) <= {float(worst):.2f} (budget "
                                f"{MAXIMAL_CONSTANT})")
    assert not bad, bad[:10]
