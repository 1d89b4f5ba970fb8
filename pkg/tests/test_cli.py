import json

import pytest

from matchverify.cli import Campaign, build_parser, check_trace, judge, main, parse_seeds
from matchverify.congest import Trace
from matchverify.graphcore import Graph, validate_matching, write_instance
from matchverify.verifier import Verdict


def test_parse_seeds():
    assert parse_seeds("3..7") == (3, 7)
    assert parse_seeds("5") == (5, 5)
    with pytest.raises(Exception):
        parse_seeds("7..3")


def test_campaign_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["--family", "random_gnm", "--n", "10", "--seeds", "0..7", "--mode", "both",
               "--out", str(out)])
    assert rc == 0
    records = [json.loads(x) for x in (out / "results.jsonl").read_text().splitlines()]
    assert len(records) == 16
    assert all(r["agree"] and not r["soundness_violation"] for r in records)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["runs"] == 16 and summary["soundness_violations"] == 0
    assert (out / "campaign.json").exists()
    assert "unbounded_agreement_rate" in capsys.readouterr().out


def test_campaign_rerun_is_identical(tmp_path):
    out = tmp_path / "a"
    main(["--family", "fig2a_gadget", "--seeds", "0..2", "--mode", "ring", "--out", str(out)])
    first = (out / "results.jsonl").read_text()
    assert main(["--campaign", str(out / "campaign.json")]) == 0
    assert (out / "results.jsonl").read_text() == first


def test_trace_and_replay(tmp_path, capsys):
    out = tmp_path / "t"
    main(["--family", "nested_odd_cycles", "--n", "11", "--seeds", "0..0", "--mode", "ring",
          "--traces", "--out", str(out)])
    trace = out / "traces" / "nested_odd_cycles-n11-s0-ring.jsonl"
    assert trace.exists()
    assert main(["--replay", str(trace)]) == 0
    assert "replay identical" in capsys.readouterr().out
    trace.write_text(trace.read_text().replace('"round":1}', '"round":99}', 1))
    assert main(["--replay", str(trace)]) == 2


def test_single_instance(tmp_path):
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    write_instance(g, validate_matching(g, [(1, 2)]), tmp_path / "g.txt", tmp_path / "m.txt")
    out = tmp_path / "o"
    assert main(["--graph", str(tmp_path / "g.txt"), "--matching", str(tmp_path / "m.txt"),
                 "--out", str(out)]) == 0
    rec = json.loads((out / "results.jsonl").read_text())
    assert rec["result"]["verdict"] == "Disproved" and rec["result"]["ell"] == 3


def test_errors_are_recorded(tmp_path):
    out = tmp_path / "e"
    main(["--family", "fig1_gadget", "--max-rounds", "3", "--out", str(out)])
    rec = json.loads((out / "results.jsonl").read_text())
    assert rec["error"].startswith("RoundLimitExceeded")


def test_usage_errors():
    assert main([]) == 2
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--mode", "fancy"])


def test_judge_flags_wrong_lengths():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    m = validate_matching(g, [(1, 2)])
    good = Verdict("Disproved", 3, 0, 3, (1, 2))
    assert judge(g, m, good, 3) == {"agree": True, "soundness_violation": False}
    wrong = Verdict("Disproved", 5, 0, 3, (1, 2))
    assert judge(g, m, wrong, 3)["soundness_violation"]
    missed = Verdict("Verified")
    assert judge(g, m, missed, 3) == {"agree": False, "soundness_violation": False}


def test_check_trace():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    t = Trace(rounds=[{"round": 1, "halted": False, "messages": [
        {"src": 0, "dst": 2, "bits": 5, "kind": "x", "payload": {}}]}])
    problems = check_trace(g, t, 4)
    assert any("not an edge" in p for p in problems)
    assert any("exceed" in p for p in problems)


def test_campaign_json_roundtrip():
    c = Campaign(family="path", n=8, seeds=(1, 4), modes=["ring"])
    assert Campaign.from_json(json.loads(json.dumps(c.to_json()))) == c
