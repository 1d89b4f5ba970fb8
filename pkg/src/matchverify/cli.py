"""Batch runner: generate instances, verify them, compare with the oracle.

Examples::

    matchverify --family random_gnm --n 16 --seeds 0..99 --out runs/gnm16
    matchverify --family fig1_gadget --seeds 0..3 --mode ring --gamma-exp 6 --traces --out runs/fig1
    matchverify --graph g.txt --matching m.txt --mode unbounded
    matchverify --campaign runs/gnm16/campaign.json       # rerun a stored campaign
    matchverify --replay runs/fig1/traces/fig1_gadget-n12-s0.jsonl

Outputs in ``--out``: ``campaign.json`` (enough to rerun everything),
``instances/``, ``results.jsonl`` (one record per run), ``summary.json``
and, with ``--traces``, per-run JSONL traces plus a ``.meta.json`` each.
The exit status is 1 if any soundness violation was observed (a
Disproved verdict whose length or endpoints the oracle does not
confirm), 2 for replay mismatches and usage errors, and 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import congest
from .generators import FAMILIES, InvalidParams, generate
from .graphcore import format_graph, format_matching, read_instance
from .oracle import maximum_matching_size, path_between, shortest_augmenting
from .ring import DEFAULT_GAMMA_EXP
from .verifier import MODES, verify

logger = logging.getLogger("matchverify")


@dataclass
class Campaign:
    family: Optional[str] = None
    n: int = 12
    seeds: tuple = (0, 0)
    modes: list = field(default_factory=lambda: ["unbounded"])
    gamma_exp: int = DEFAULT_GAMMA_EXP
    max_rounds: Optional[int] = None
    oracle_check: bool = True
    traces: bool = False
    instances: list = field(default_factory=list)  # [graph_path, matching_path] pairs
    workers: int = 1

    def to_json(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Campaign":
        d = dict(d)
        d["seeds"] = tuple(d.get("seeds", (0, 0)))
        return cls(**d)


def parse_seeds(text: str) -> tuple[int, int]:
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return lo, hi


@dataclass
class Job:
    name: str
    graph_path: str
    matching_path: str
    seed: int
    mode: str
    family: Optional[str]
    n: int


def _jobs(c: Campaign, out: Path) -> list[Job]:
    inst_dir = out / "instances"
    inst_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    lo, hi = c.seeds
    if c.instances:
        for g, m in c.instances:
            name = Path(g).stem
            for seed in range(lo, hi + 1):
                for mode in c.modes:
                    jobs.append(Job(f"{name}-s{seed}", g, m, seed, mode, None, 0))
        return jobs
    for seed in range(lo, hi + 1):
        graph, matching = generate(c.family, c.n, seed)
        name = f"{c.family}-n{c.n}-s{seed}"
        gp = (inst_dir / f"{name}.graph").resolve()
        mp = (inst_dir / f"{name}.matching").resolve()
        gp.write_text(format_graph(graph))
        mp.write_text(format_matching(matching))
        for mode in c.modes:
            jobs.append(Job(name, str(gp), str(mp), seed, mode, c.family, c.n))
    return jobs


def _run_job(args) -> dict:
    job, c, trace_dir = args
    graph, matching = read_instance(job.graph_path, job.matching_path)
    rec = {
        "name": job.name, "family": job.family, "n": graph.n, "m": graph.m,
        "seed": job.seed, "mode": job.mode, "matching_size": len(matching),
        "graph": job.graph_path, "matching": job.matching_path,
    }
    try:
        v = verify(graph, matching, job.mode, job.seed, gamma_exp=c.gamma_exp,
                   max_rounds=c.max_rounds, record=c.traces)
    except Exception as exc:  # recorded, the campaign goes on
        rec["error"] = f"{type(exc).__name__}: {exc}"
        return rec
    rec["result"] = v.to_json()
    rec["tree_depth"] = v.tree_depth
    rec["max_bits"] = v.max_bits
    rec["bit_budget"] = congest.default_bit_budget(graph.n) if job.mode == "ring" else None
    if trace_dir is not None:
        rec["traces"] = _write_traces(trace_dir, job, c, v)
    if c.oracle_check:
        o = shortest_augmenting(graph, matching, want_paths=False)
        s_star = maximum_matching_size(graph, matching)
        rec["oracle"] = {"ell": o.shortest_aug_len, "max_matching_size": s_star}
        rec.update(judge(graph, matching, v, o.shortest_aug_len))
    return rec


def judge(graph, matching, verdict, oracle_ell) -> dict:
    """Compare a verdict with the oracle's shortest augmenting length."""
    sound = True
    if verdict.disproved:
        if oracle_ell is None or verdict.ell != oracle_ell:
            sound = False
        elif path_between(graph, matching, verdict.f, verdict.f_prime, verdict.ell) is None:
            sound = False
    agree = sound and (verdict.ell == oracle_ell)
    return {"agree": agree, "soundness_violation": not sound}


def _write_traces(trace_dir: Path, job: Job, c: Campaign, v) -> list[str]:
    base = f"{job.name}-{job.mode}"
    names = []
    for k, tr in enumerate(v.traces):
        name = f"{base}.jsonl" if len(v.traces) == 1 else f"{base}.c{k}.jsonl"
        tr.write(trace_dir / name)
        names.append(name)
    meta = {"graph": job.graph_path, "matching": job.matching_path, "seed": job.seed,
            "mode": job.mode, "gamma_exp": c.gamma_exp, "max_rounds": c.max_rounds,
            "traces": names, "result": v.to_json()}
    (trace_dir / f"{base}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return names


def summarize(records: list[dict]) -> dict:
    out: dict = {"runs": len(records)}
    errors = [r for r in records if "error" in r]
    out["errors"] = len(errors)
    checked = [r for r in records if "agree" in r]
    out["oracle_checked"] = len(checked)
    out["soundness_violations"] = sum(r["soundness_violation"] for r in checked)
    for mode in MODES:
        rs = [r for r in checked if r["mode"] == mode]
        if rs:
            bad = sum(not r["agree"] for r in rs)
            out[f"{mode}_disagreements"] = bad
            out[f"{mode}_agreement_rate"] = (len(rs) - bad) / len(rs)
    ok = [r for r in records if "result" in r]
    dis = [r for r in ok if r["result"]["verdict"] == "Disproved"]
    ver = [r for r in ok if r["result"]["verdict"] == "Verified"]
    out["disproved"], out["verified"] = len(dis), len(ver)
    out["max_rounds_per_D_ell"] = max(
        (r["result"]["rounds"] / (r["tree_depth"] + r["result"]["ell"] + 1) for r in dis), default=None)
    out["max_rounds_per_M_D"] = max(
        (r["result"]["rounds"] / (r["matching_size"] + r["tree_depth"] + 1) for r in ver), default=None)
    out["max_message_bits"] = max((r["max_bits"] for r in ok), default=0)
    return out


def run_campaign(c: Campaign, out: Path) -> tuple[list[dict], dict]:
    out.mkdir(parents=True, exist_ok=True)
    (out / "campaign.json").write_text(json.dumps(c.to_json(), indent=2, sort_keys=True))
    trace_dir = None
    if c.traces:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)
    jobs = _jobs(c, out)
    work = [(j, c, trace_dir) for j in jobs]
    if c.workers > 1:
        with ProcessPoolExecutor(max_workers=c.workers) as pool:
            records = list(pool.map(_run_job, work, chunksize=4))
    else:
        records = [_run_job(w) for w in work]
    with open(out / "results.jsonl", "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    summary = summarize(records)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return records, summary


def print_summary(summary: dict, stream=None) -> None:
    stream = stream or sys.stdout
    width = max(len(k) for k in summary)
    for k in sorted(summary):
        v = summary[k]
        if isinstance(v, float):
            v = f"{v:.4f}"
        print(f"  {k:<{width}}  {v}", file=stream)


def replay(trace_path: Path) -> int:
    """Re-run the verification a trace came from and compare byte for byte."""
    name = trace_path.name
    stem = re.sub(r"(\.c\d+)?\.jsonl$", "", name)
    meta_path = trace_path.with_name(f"{stem}.meta.json")
    if not meta_path.exists():
        print(f"no metadata next to {trace_path} (expected {meta_path.name})", file=sys.stderr)
        return 2
    meta = json.loads(meta_path.read_text())
    graph, matching = read_instance(meta["graph"], meta["matching"])
    v = verify(graph, matching, meta["mode"], meta["seed"], gamma_exp=meta["gamma_exp"],
               max_rounds=meta.get("max_rounds"), record=True)
    k = meta["traces"].index(name)
    stored = trace_path.read_text()
    fresh = v.traces[k].to_jsonl()
    trace = congest.Trace.from_jsonl(stored)
    print(f"trace {name}: {trace.round_count} rounds, {trace.message_count()} messages, "
          f"max {trace.max_bits()} bits")
    print(f"verdict {v.kind}" + (f" ell={v.ell} f={v.f} f'={v.f_prime}" if v.disproved else ""))
    problems = check_trace(graph, trace, congest.default_bit_budget(graph.n)
                           if meta["mode"] == "ring" else None)
    for p in problems:
        print(f"  invalid: {p}")
    if fresh != stored:
        print("replay MISMATCH: the rerun produced a different trace")
        return 2
    if v.to_json() != meta["result"]:
        print("replay MISMATCH: the rerun produced a different verdict")
        return 2
    print("replay identical")
    return 2 if problems else 0


def check_trace(graph, trace: congest.Trace, budget: Optional[int]) -> list[str]:
    """Structural checks: consecutive rounds, neighbour-only traffic, budget."""
    problems = []
    for i, rec in enumerate(trace.rounds, start=1):
        if rec["round"] != i:
            problems.append(f"record {i} is labelled round {rec['round']}")
        seen = set()
        for m in rec["messages"]:
            if not graph.has_edge(m["src"], m["dst"]):
                problems.append(f"round {i}: {m['src']}->{m['dst']} is not an edge")
            if (m["src"], m["dst"]) in seen:
                problems.append(f"round {i}: two messages {m['src']}->{m['dst']}")
            seen.add((m["src"], m["dst"]))
            if budget is not None and m["bits"] > budget:
                problems.append(f"round {i}: {m['bits']} bits exceed budget {budget}")
    return problems


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="matchverify",
        description="Distributed maximum-matching verification: campaigns against a brute-force oracle.")
    p.add_argument("--family", choices=sorted(FAMILIES), help="instance generator")
    p.add_argument("--n", type=int, default=12, help="instance size (a size hint for gadgets)")
    p.add_argument("--seeds", type=parse_seeds, default=(0, 0), metavar="A..B",
                   help="inclusive seed range (default 0..0)")
    p.add_argument("--mode", choices=[*MODES, "both"], default="unbounded")
    p.add_argument("--gamma-exp", type=int, default=DEFAULT_GAMMA_EXP, metavar="C",
                   help="ring modulus is n**C in ring mode (default %(default)s)")
    p.add_argument("--max-rounds", type=int, default=None,
                   help="abort a run (recorded as an error) beyond this many rounds")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--replay", type=Path, default=None, metavar="TRACE.jsonl",
                   help="rerun the verification behind a stored trace and compare")
    p.add_argument("--oracle-check", choices=["on", "off"], default="on")
    p.add_argument("--traces", action="store_true", help="write per-run JSONL traces")
    p.add_argument("--graph", type=Path, help="verify this graph file instead of generating")
    p.add_argument("--matching", type=Path, help="matching file for --graph")
    p.add_argument("--campaign", type=Path, help="rerun a stored campaign.json")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.replay is not None:
        return replay(args.replay)
    if args.campaign is not None:
        c = Campaign.from_json(json.loads(args.campaign.read_text()))
        out = args.out or args.campaign.parent
    else:
        modes = list(MODES) if args.mode == "both" else [args.mode]
        c = Campaign(family=args.family, n=args.n, seeds=args.seeds, modes=modes,
                     gamma_exp=args.gamma_exp, max_rounds=args.max_rounds,
                     oracle_check=args.oracle_check == "on", traces=args.traces,
                     workers=args.workers)
        if args.graph is not None:
            c.instances = [[str(args.graph), str(args.matching) if args.matching else ""]]
            c.family = None
        elif args.family is None:
            print("give --family, --graph, --campaign or --replay", file=sys.stderr)
            return 2
        out = args.out or Path("matchverify-out")
    try:
        records, summary = run_campaign(c, out)
    except InvalidParams as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return 2
    for r in records:
        if r.get("soundness_violation"):
            logger.error("soundness violation on %s (%s, seed %s)", r["name"], r["mode"], r["seed"])
        if "error" in r:
            logger.warning("%s (%s): %s", r["name"], r["mode"], r["error"])
    print(f"campaign written to {out}")
    print_summary(summary)
    return 1 if summary["soundness_violations"] else 0


if __name__ == "__main__":
    sys.exit(main())
