"""Synchronous CONGEST round engine.

Every round has two phases.  In the send phase each node (ascending id)
looks at its state and emits at most one message per neighbour; in the
receive phase each node is handed everything addressed to it in that
round.  A message emitted in round ``r`` is therefore seen by its
recipient at the end of round ``r`` and can influence what the recipient
sends in round ``r + 1`` -- the usual "round r spans time r-1 to r"
convention.

Bit sizes are computed by a canonical serializer (:class:`BitCodec`) so
that the bounded mode's budget check does not depend on Python object
sizes.  In unbounded mode the sizes are still recorded for statistics.

The module also hosts the small tree protocols every driver needs:
leader election with a BFS tree, convergecast and broadcast.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, ClassVar, Optional

import numpy as np

from .graphcore import Graph

KIND_TAG_BITS = 3


class EngineError(RuntimeError):
    pass


class MessageTooLarge(EngineError):
    def __init__(self, src, dst, rnd, bits, budget=None):
        super().__init__(
            f"message {src}->{dst} in round {rnd} has {bits} bits (budget {budget})"
        )
        self.src, self.dst, self.round, self.bits, self.budget = src, dst, rnd, bits, budget


class NonNeighborSend(EngineError):
    def __init__(self, src, dst, rnd):
        super().__init__(f"node {src} tried to send to non-neighbour {dst} in round {rnd}")
        self.src, self.dst, self.round = src, dst, rnd


class Disconnected(EngineError):
    pass


def default_bit_budget(n: int) -> int:
    return 8 * id_bits(n) + 64


def id_bits(n: int) -> int:
    """Bits for one node id, with one spare code point for "none"."""
    return max(1, math.ceil(math.log2(n + 1)))


def elias_gamma_bits(x: int) -> int:
    """Length of the Elias-gamma code of ``x + 1`` (so ``x >= 0``)."""
    if x < 0:
        raise ValueError("elias_gamma_bits needs a non-negative integer")
    return 2 * (x + 1).bit_length() - 1


class BitCodec:
    """Canonical bit accounting for message payloads.

    Payloads describe themselves as a list of ``(type, value)`` fields:

    ``id``    node id or ``None`` -- fixed ``id_bits(n)`` bits
    ``ring``  element of Z/gamma  -- fixed ``ceil(log2 gamma)`` bits
    ``uint``  non-negative int    -- Elias gamma
    ``frac``  non-negative Fraction -- Elias gamma of numerator and denominator
    ``bit``   boolean             -- 1 bit
    ``list``  list of field lists -- Elias-gamma length prefix + items
    """

    def __init__(self, n: int, gamma: Optional[int] = None):
        self.n = n
        self.id_bits = id_bits(n)
        self.gamma = gamma
        self.ring_bits = max(1, math.ceil(math.log2(gamma))) if gamma and gamma > 1 else 1

    def field_bits(self, ftype: str, value) -> int:
        if ftype == "id":
            return self.id_bits
        if ftype == "ring":
            return self.ring_bits
        if ftype == "uint":
            return elias_gamma_bits(int(value))
        if ftype == "frac":
            value = Fraction(value)
            return elias_gamma_bits(value.numerator) + elias_gamma_bits(value.denominator)
        if ftype == "bit":
            return 1
        if ftype == "list":
            return elias_gamma_bits(len(value)) + sum(self.fields_bits(item) for item in value)
        raise ValueError(f"unknown wire field type {ftype!r}")

    def fields_bits(self, fields) -> int:
        return sum(self.field_bits(t, v) for t, v in fields)

    def size(self, payload: "Message") -> int:
        return KIND_TAG_BITS + self.fields_bits(payload.wire_fields())


class Message:
    """Base class for payloads.  Subclasses set ``kind`` and implement
    :meth:`wire_fields` and :meth:`to_json`."""

    kind: ClassVar[str] = "message"

    def wire_fields(self) -> list:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Envelope:
    src: int
    dst: int
    payload: Message
    bit_size: int

    def to_json(self) -> dict:
        return {
            "src": self.src,
            "dst": self.dst,
            "bits": self.bit_size,
            "kind": self.payload.kind,
            "payload": self.payload.to_json(),
        }


@dataclass
class Trace:
    """Per-round message log.  ``rounds[i]`` is the record of round ``i + 1``
    (rounds are renumbered consecutively when traces are concatenated)."""

    seed: int = 0
    rounds: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def round_count(self) -> int:
        return len(self.rounds)

    def add_round(self, envelopes: list[Envelope], halted: bool) -> None:
        self.rounds.append(
            {
                "round": len(self.rounds) + 1,
                "messages": [e.to_json() for e in envelopes],
                "halted": bool(halted),
            }
        )

    def extend(self, other: "Trace") -> None:
        base = len(self.rounds)
        for rec in other.rounds:
            rec = dict(rec)
            rec["round"] = rec["round"] + base
            self.rounds.append(rec)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.rounds)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str, seed: int = 0) -> "Trace":
        t = cls(seed=seed)
        for line in text.splitlines():
            if line.strip():
                t.rounds.append(json.loads(line))
        return t

    def max_bits(self) -> int:
        return max((m["bits"] for r in self.rounds for m in r["messages"]), default=0)

    def message_count(self) -> int:
        return sum(len(r["messages"]) for r in self.rounds)


def node_rng(seed: int, v: int) -> random.Random:
    """Independent per-node stream derived from ``(seed, v)``."""
    state = np.random.SeedSequence([int(seed), int(v)]).generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


@dataclass
class NodeView:
    """What a node knows about itself before round 1."""

    id: int
    n: int
    neighbors: tuple[int, ...]
    rng: random.Random


@dataclass
class RunResult:
    states: list
    trace: Trace
    rounds: int
    halted: bool
    max_bits: int = 0


def run(
    graph: Graph,
    protocol,
    max_rounds: int,
    *,
    bit_budget: Optional[int] = None,
    seed: int = 0,
    gamma: Optional[int] = None,
    record: bool = True,
    snapshot: Optional[Callable[[int, list], Any]] = None,
) -> RunResult:
    """Run ``protocol`` on ``graph`` for up to ``max_rounds`` rounds.

    ``protocol`` provides ``init(view) -> state``, ``send(state, rnd) ->
    {dst: Message}`` and ``receive(state, rnd, {src: Message})``, plus an
    optional ``halted(states, rnd) -> bool`` evaluated after each round.
    ``bit_budget=None`` is the unbounded mode.  ``snapshot(rnd, states)``
    is called after every round (and with ``rnd=0`` after init).
    """
    codec = BitCodec(graph.n, gamma)
    states = [protocol.init(NodeView(v, graph.n, graph.neighbors(v), node_rng(seed, v)))
              for v in range(graph.n)]
    trace = Trace(seed=seed)
    halt_fn = getattr(protocol, "halted", None)
    if snapshot is not None:
        snapshot(0, states)
    halted = False
    rnd = 0
    max_bits = 0
    while rnd < max_rounds and not halted:
        rnd += 1
        envelopes = []
        inboxes: list[dict] = [dict() for _ in range(graph.n)]
        for v in range(graph.n):
            out = protocol.send(states[v], rnd) or {}
            for dst in sorted(out):
                if not graph.has_edge(v, dst):
                    raise NonNeighborSend(v, dst, rnd)
                payload = out[dst]
                bits = codec.size(payload)
                if bit_budget is not None and bits > bit_budget:
                    raise MessageTooLarge(v, dst, rnd, bits, bit_budget)
                max_bits = max(max_bits, bits)
                env = Envelope(v, dst, payload, bits)
                envelopes.append(env)
                inboxes[dst][v] = payload
        for v in range(graph.n):
            protocol.receive(states[v], rnd, inboxes[v])
        halted = bool(halt_fn(states, rnd)) if halt_fn is not None else False
        if record:
            trace.add_round(envelopes, halted)
        if snapshot is not None:
            snapshot(rnd, states)
    return RunResult(states, trace, rnd, halted, max_bits)


# -- generic tree protocols ---------------------------------------------------


@dataclass(frozen=True)
class ElectMsg(Message):
    kind: ClassVar[str] = "elect"
    leader: int
    dist: int

    def wire_fields(self):
        return [("id", self.leader), ("uint", self.dist)]

    def to_json(self):
        return {"leader": self.leader, "dist": self.dist}


@dataclass(frozen=True)
class ChildMsg(Message):
    kind: ClassVar[str] = "child"

    def wire_fields(self):
        return []

    def to_json(self):
        return {}


@dataclass(frozen=True)
class ValueMsg(Message):
    """An aggregate value: int, Fraction, ``None`` or a tuple of ints/None."""

    kind: ClassVar[str] = "value"
    value: Any

    def wire_fields(self):
        return _value_fields(self.value)

    def to_json(self):
        v = self.value
        if isinstance(v, Fraction):
            return {"value": [v.numerator, v.denominator], "type": "frac"}
        if isinstance(v, tuple):
            return {"value": list(v), "type": "tuple"}
        return {"value": v}


def _value_fields(value) -> list:
    if value is None:
        return [("bit", 0)]
    if isinstance(value, bool):
        return [("bit", 1), ("bit", value)]
    if isinstance(value, Fraction):
        return [("bit", 1), ("frac", value)]
    if isinstance(value, int):
        return [("bit", 1), ("uint", value)]
    if isinstance(value, tuple):
        items = []
        for x in value:
            items.append([("bit", 0)] if x is None else [("bit", 1), ("uint", x)])
        return [("bit", 1), ("list", items)]
    raise TypeError(f"cannot encode aggregate value {value!r}")


@dataclass
class Tree:
    leader: int
    parent: list  # parent[v] is None for the leader
    children: list
    depth: list
    height: int  # D_T

    @property
    def n(self) -> int:
        return len(self.parent)


@dataclass
class _ElectState:
    id: int
    leader: int
    dist: int
    parent: Optional[int]
    neighbors: tuple = ()
    changed: bool = True


class LeaderElection:
    """Minimum-id flooding; each node adopts the lexicographically best
    ``(leader, dist)`` it hears and the smallest sender offering it as parent."""

    def init(self, view: NodeView):
        return _ElectState(view.id, view.id, 0, None, view.neighbors)

    def send(self, s, rnd):
        if s.changed:
            s.changed = False
            return {u: ElectMsg(s.leader, s.dist) for u in s.neighbors}
        return {}

    def receive(self, s, rnd, inbox):
        best = (s.leader, s.dist, s.parent)
        for src in sorted(inbox):
            m = inbox[src]
            cand = (m.leader, m.dist + 1, src)
            if (cand[0], cand[1]) < (best[0], best[1]):
                best = cand
        if (best[0], best[1]) != (s.leader, s.dist):
            s.leader, s.dist, s.parent = best
            s.changed = True

    def halted(self, states, rnd):
        return not any(s.changed for s in states)


class _ChildNotify:
    def __init__(self, parents):
        self.parents = parents

    def init(self, view):
        return {"id": view.id, "children": set()}

    def send(self, s, rnd):
        p = self.parents[s["id"]]
        return {} if p is None else {p: ChildMsg()}

    def receive(self, s, rnd, inbox):
        s["children"].update(inbox)


class Convergecast:
    """Aggregate one value per node up a tree.  A node reports to its parent
    in the round after the last of its children has reported (leaves in
    round 1), so the leader holds the result after ``height`` rounds."""

    def __init__(self, tree: Tree, values, op: Callable):
        self.tree, self.values, self.op = tree, values, op

    def init(self, view):
        v = view.id
        return {"id": v, "acc": self.values[v], "waiting": set(self.tree.children[v]), "done": False}

    def send(self, s, rnd):
        p = self.tree.parent[s["id"]]
        if p is None or s["done"] or s["waiting"]:
            return {}
        s["done"] = True
        return {p: ValueMsg(s["acc"])}

    def receive(self, s, rnd, inbox):
        for src in sorted(inbox):
            s["acc"] = self.op(s["acc"], inbox[src].value)
            s["waiting"].discard(src)

    def halted(self, states, rnd):
        root = states[self.tree.leader]
        return not root["waiting"]


class Broadcast:
    def __init__(self, tree: Tree, value):
        self.tree, self.value = tree, value

    def init(self, view):
        v = view.id
        has = v == self.tree.leader
        return {"id": v, "value": self.value if has else None, "has": has, "sent": False}

    def send(self, s, rnd):
        if not s["has"] or s["sent"]:
            return {}
        s["sent"] = True
        return {c: ValueMsg(s["value"]) for c in self.tree.children[s["id"]]}

    def receive(self, s, rnd, inbox):
        for src in inbox:
            s["value"], s["has"] = inbox[src].value, True

    def halted(self, states, rnd):
        return all(s["has"] for s in states) and all(
            s["sent"] or not self.tree.children[s["id"]] for s in states
        )


def _combine(op) -> Callable:
    if callable(op):
        return op
    if op == "sum":
        return lambda a, b: a + b
    if op == "min":
        return lambda a, b: b if a is None else a if b is None else min(a, b)
    if op == "max":
        return lambda a, b: b if a is None else a if b is None else max(a, b)
    if op == "count_height":
        return lambda a, b: (a[0] + b[0], max(a[1], b[1]))
    raise ValueError(f"unknown aggregate op {op!r}")


@dataclass
class TreeRun:
    """Result of a tree protocol: the value and the rounds it cost."""

    value: Any
    rounds: int
    trace: Trace
    node_values: list = field(default_factory=list)


def convergecast_aggregate(graph: Graph, tree: Tree, per_node_value, op: str = "sum",
                           bit_budget: Optional[int] = None) -> TreeRun:
    values = list(per_node_value)
    if tree.n == 1:
        return TreeRun(values[0], 0, Trace())
    res = run(graph, Convergecast(tree, values, _combine(op)), tree.height + 1,
              bit_budget=bit_budget)
    root = res.states[tree.leader]
    assert not root["waiting"], "convergecast did not finish within the tree height"
    return TreeRun(root["acc"], res.rounds, res.trace)


def broadcast(graph: Graph, tree: Tree, value, bit_budget: Optional[int] = None) -> TreeRun:
    if tree.n == 1 or tree.height == 0:
        return TreeRun(value, 0, Trace(), [value] * tree.n)
    res = run(graph, Broadcast(tree, value), tree.height, bit_budget=bit_budget)
    got = [s["value"] for s in res.states]
    assert all(s["has"] for s in res.states), "broadcast did not reach every node"
    return TreeRun(value, res.rounds, res.trace, got)


@dataclass
class Election:
    tree: Tree
    rounds: int
    trace: Trace


def build_bfs_and_elect(graph: Graph, bit_budget: Optional[int] = None) -> Election:
    """Elect the minimum id as leader and build a BFS tree rooted at it.

    The flooding stage stops once a round passes with no change anywhere;
    then every node names its parent (one round), the leader learns the
    node count and the tree height by convergecast and broadcasts the
    height.  Raises :class:`Disconnected` if more than one leader emerges
    or flooding does not settle within ``2n`` rounds.
    """
    n = graph.n
    if n == 1:
        tree = Tree(0, [None], [[]], [0], 0)
        return Election(tree, 0, Trace())
    flood = run(graph, LeaderElection(), 2 * n, bit_budget=bit_budget)
    if not flood.halted:
        raise Disconnected("leader election did not stabilise within 2n rounds")
    leaders = {s.leader for s in flood.states}
    if len(leaders) != 1:
        raise Disconnected(f"{len(leaders)} leaders elected; graph is not connected")
    parents = [s.parent for s in flood.states]
    depth = [s.dist for s in flood.states]
    notify = run(graph, _ChildNotify(parents), 1, bit_budget=bit_budget)
    children = [sorted(s["children"]) for s in notify.states]
    leader = leaders.pop()
    height = max(depth)
    tree = Tree(leader, parents, children, depth, height)
    trace = Trace()
    trace.extend(flood.trace)
    trace.extend(notify.trace)
    count = convergecast_aggregate(graph, tree, [(1, d) for d in depth],
                                   op="count_height", bit_budget=bit_budget)
    if count.value[0] != n:
        raise Disconnected(f"leader counted {count.value[0]} of {n} nodes")
    trace.extend(count.trace)
    down = broadcast(graph, tree, count.value[1], bit_budget=bit_budget)
    trace.extend(down.trace)
    rounds = flood.rounds + notify.rounds + count.rounds + down.rounds
    return Election(tree, rounds, trace)
