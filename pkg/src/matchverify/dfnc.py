"""Distributed free-node clustering (token dissemination + flow circulation).

Each node keeps

``cid``    the free node whose cluster it joined,
``r0, r1`` the rounds in which it learned its 0- and 1-reachability,
``pred``   the neighbours that delivered ``cid`` in its first token round,

and learns them from two kinds of traffic:

* **Tokens.**  In round ``t`` a node with ``r0 == t-1`` sends ``cid`` over
  its matched edge; otherwise, if ``r1 == t-1``, over all its unmatched
  edges.  The first round ``t`` in which tokens arrive fixes ``cid`` (the
  smallest token), ``pred`` (its senders) and ``r1 = t`` / ``r0 = t`` for
  even / odd ``t``.

* **Flows.**  When an intra-cluster edge carries tokens both ways and
  neither endpoint is the other's predecessor, a unit of flow is born on
  it, half at each endpoint.  Nodes pass flows towards their
  predecessors, splitting evenly; a node that would forward the *whole*
  unit of some edge in one round drops it instead.  The first round
  after which a node still forwards something (an *incomplete round*)
  gives it its second reachability value.

This module contains the shared machinery and the exact-rational variant.
The ring variant lives in :mod:`matchverify.ring`.
"""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Optional

from . import congest
from .congest import Message
from .graphcore import Graph, Matching, ONE_EDGE, ZERO_EDGE, edge_key

HALF = Fraction(1, 2)


class ProtocolViolation(AssertionError):
    """An internal consistency check of the protocol failed."""


class ScheduleInPast(ProtocolViolation):
    pass


class FlowOverflow(ProtocolViolation):
    pass


@dataclass(frozen=True)
class Token:
    cid: int
    # the receiver is one of the sender's predecessors; lets both endpoints
    # of an edge evaluate the "neither is the other's predecessor" test
    to_pred: bool

    def wire_fields(self):
        return [("id", self.cid), ("bit", self.to_pred)]


@dataclass(frozen=True)
class Bundle(Message):
    """Everything one node sends one neighbour in one round."""

    kind: ClassVar[str] = "dfnc"
    token: Optional[Token] = None
    flows: tuple = ()  # ((u, w), Fraction) pairs, rational variant
    ring: Optional[int] = None  # ring variant
    nonce: Optional[int] = None  # ring variant, first round only

    def wire_fields(self):
        out = [("bit", self.token is not None)]
        if self.token is not None:
            out += self.token.wire_fields()
        out.append(("bit", bool(self.flows)))
        if self.flows:
            out.append(("list", [[("id", e[0]), ("id", e[1]), ("frac", f)] for e, f in self.flows]))
        out.append(("bit", self.ring is not None))
        if self.ring is not None:
            out.append(("ring", self.ring))
        out.append(("bit", self.nonce is not None))
        if self.nonce is not None:
            out.append(("ring", self.nonce))
        return out

    def to_json(self):
        d = {}
        if self.token is not None:
            d["token"] = {"cid": self.token.cid, "to_pred": self.token.to_pred}
        if self.flows:
            d["flows"] = [[e[0], e[1], f.numerator, f.denominator] for e, f in self.flows]
        if self.ring is not None:
            d["ring"] = self.ring
        if self.nonce is not None:
            d["nonce"] = self.nonce
        return d

    def with_token(self, token: Token) -> "Bundle":
        return dataclasses.replace(self, token=token)


@dataclass
class NodeState:
    id: int
    mate: Optional[int]
    neighbors: tuple
    rng: object = None
    cid: Optional[int] = None
    r0: Optional[int] = None
    r1: Optional[int] = None
    pred: frozenset = frozenset()
    token_in: dict = field(default_factory=dict)   # nbr -> (cid, round, to_pred)
    token_out: dict = field(default_factory=dict)  # nbr -> round
    generated: set = field(default_factory=set)    # neighbours whose edge already generated
    out: dict = field(default_factory=dict)        # round -> buffer (variant specific)
    first_incomplete: Optional[int] = None
    extra: dict = field(default_factory=dict)      # variant specific

    @property
    def free(self) -> bool:
        return self.mate is None

    def kind(self, nbr: int) -> int:
        return ONE_EDGE if nbr == self.mate else ZERO_EDGE

    def registers(self) -> tuple:
        return (self.cid, self.pred, self.r0, self.r1)


@dataclass
class Audit:
    """Out-of-band bookkeeping for tests; never read by the protocol."""

    generated: list = field(default_factory=list)   # (edge, node, receipt_round, recognised_round)
    assigned: list = field(default_factory=list)    # (node, key, receipt_round, value, send_round)
    discards: list = field(default_factory=list)    # (node, key, round, value)
    absorbed: list = field(default_factory=list)    # (node, key, round, value)
    incomplete: list = field(default_factory=list)  # (node, round, keys still sent)


class DfncBase:
    """Token rule, generation detection, scheduling and register updates.

    Subclasses decide what a flow *is* by implementing ``_take_receipts``,
    ``_finalize`` and ``_emit_flows``.
    """

    offset = 0  # engine rounds spent before protocol round 1

    def __init__(self, graph: Graph, matching: Matching, audit: Optional[Audit] = None):
        self.graph = graph
        self.matching = matching
        self.audit = audit

    # -- engine interface -------------------------------------------------

    def init(self, view: congest.NodeView) -> NodeState:
        s = NodeState(view.id, self.matching.mate[view.id], view.neighbors, view.rng)
        if s.free:
            s.cid, s.r0, s.r1 = s.id, 0, 0
        return s

    def send(self, s: NodeState, engine_round: int):
        t = engine_round - self.offset
        if t < 1:
            return self._pre_round(s, engine_round)
        out: dict[int, Bundle] = self._emit_flows(s, t)
        for nbr in self._token_targets(s, t):
            tok = Token(s.cid, nbr in s.pred)
            out[nbr] = out[nbr].with_token(tok) if nbr in out else Bundle(token=tok)
            s.token_out[nbr] = t
        return out

    def receive(self, s: NodeState, engine_round: int, inbox: dict):
        t = engine_round - self.offset
        if t < 1:
            return self._pre_receive(s, engine_round, inbox)
        tokens = {src: m.token for src, m in inbox.items() if m.token is not None}
        for src, tok in tokens.items():
            s.token_in[src] = (tok.cid, t, tok.to_pred)
        if tokens and s.cid is None:
            self._first_tokens(s, t, tokens)
        self._take_receipts(s, t, inbox)
        self._detect_generation(s, t)
        self._finalize(s, t)

    def _pre_round(self, s, engine_round):
        return {}

    def _pre_receive(self, s, engine_round, inbox):
        pass

    # -- tokens -------------------------------------------------------------

    def _token_targets(self, s: NodeState, t: int) -> list[int]:
        if s.cid is None:
            return []
        if s.mate is not None and s.r0 == t - 1:
            if s.r1 == t - 1:
                raise ProtocolViolation(f"node {s.id}: r0 and r1 both equal {t - 1}")
            return [s.mate]
        if s.r1 == t - 1:
            return [u for u in s.neighbors if u != s.mate]
        return []

    def _first_tokens(self, s: NodeState, t: int, tokens: dict) -> None:
        if s.free:
            raise ProtocolViolation(f"free node {s.id} adopted a token")
        if s.first_incomplete is not None:
            raise ProtocolViolation(
                f"node {s.id} got its first token in round {t}, after incomplete round "
                f"{s.first_incomplete}")
        s.cid = min(tok.cid for tok in tokens.values())
        s.pred = frozenset(src for src, tok in tokens.items() if tok.cid == s.cid)
        self._set_register(s, t)

    def _set_register(self, s: NodeState, t: int) -> None:
        if t % 2 == 0:
            if s.r1 is not None:
                raise ProtocolViolation(f"node {s.id}: r1 already {s.r1}, cannot set {t}")
            s.r1 = t
        else:
            if s.r0 is not None:
                raise ProtocolViolation(f"node {s.id}: r0 already {s.r0}, cannot set {t}")
            s.r0 = t

    # -- flow generation ----------------------------------------------------

    def _detect_generation(self, s: NodeState, t: int) -> None:
        """Edges that now carry tokens both ways.  The receipt belongs to
        the round the neighbour sent its token, which may be earlier than
        the current round."""
        for x in sorted(s.token_in):
            if x in s.generated or x not in s.token_out:
                continue
            cid_x, r_x, me_pred_of_x = s.token_in[x]
            s.generated.add(x)
            if cid_x != s.cid or me_pred_of_x or x in s.pred:
                continue
            if self.audit is not None:
                self.audit.generated.append((edge_key(s.id, x), s.id, r_x, t))
            self._generation_receipt(s, x, r_x, t)

    def _generation_receipt(self, s, x, r_x, now):
        raise NotImplementedError

    # -- scheduling ---------------------------------------------------------

    def _schedule(self, s: NodeState, receipt_round: int, edge_kinds: set, now: int) -> int:
        """Round in which flows received in ``receipt_round`` over edges of
        the given kinds are forwarded."""
        if not s.pred:
            raise ProtocolViolation(f"node {s.id} must forward flow but has no predecessor")
        pred_kinds = {s.kind(p) for p in s.pred}
        if len(pred_kinds) != 1:
            raise ProtocolViolation(f"node {s.id} has predecessors over both edge kinds")
        if edge_kinds == {ZERO_EDGE} and pred_kinds == {ZERO_EDGE}:
            if s.r0 is None or s.r1 is None:
                raise ProtocolViolation(f"node {s.id} needs both registers to delay a flow")
            when = receipt_round + s.r1 - s.r0 + 1
        else:
            when = receipt_round + 1
        if when <= now:
            raise ScheduleInPast(
                f"node {s.id}: flow received in round {receipt_round} scheduled for "
                f"round {when}, recognised in round {now}")
        return when

    def _mark_incomplete(self, s: NodeState, t: int, keys=()) -> None:
        if s.first_incomplete is None and not s.free:
            s.first_incomplete = t
            self._set_register(s, t)
            if self.audit is not None:
                self.audit.incomplete.append((s.id, t, tuple(keys)))

    # subclass hooks
    def _take_receipts(self, s, t, inbox):
        raise NotImplementedError

    def _finalize(self, s, t):
        raise NotImplementedError

    def _emit_flows(self, s, t) -> dict:
        raise NotImplementedError


class RationalDfnc(DfncBase):
    """Flows are exact ``(edge, Fraction)`` records; unit sums are dropped."""

    def _take_receipts(self, s: NodeState, t: int, inbox: dict) -> None:
        recs = []
        kinds = set()
        for src in sorted(inbox):
            for key, val in inbox[src].flows:
                recs.append((key, val))
                kinds.add(s.kind(src))
        if recs:
            self._forward(s, t, recs, kinds, t)

    def _generation_receipt(self, s, x, r_x, now):
        self._forward(s, r_x, [(edge_key(s.id, x), HALF)], {s.kind(x)}, now)

    def _forward(self, s: NodeState, t: int, recs: list, kinds: set, now: int) -> None:
        if s.free:
            if self.audit is not None:
                for key, val in recs:
                    self.audit.absorbed.append((s.id, key, t, val))
            return
        when = self._schedule(s, t, kinds, now)
        totals: dict = defaultdict(Fraction)
        for key, val in recs:
            totals[key] += val
        share = len(s.pred)
        buf = s.out.setdefault(when, {})
        for key in sorted(totals):
            val = totals[key]
            if self.audit is not None:
                self.audit.assigned.append((s.id, key, t, val, when))
            for p in s.pred:
                slot = buf.setdefault(p, {})
                slot[key] = slot.get(key, Fraction(0)) + val / share

    def _finalize(self, s: NodeState, t: int) -> None:
        """Apply the unit-drop rule to the buffers of round ``t + 1`` and
        decide whether round ``t`` is incomplete."""
        buf = s.out.get(t + 1)
        if not buf:
            return
        sums: dict = defaultdict(Fraction)
        for slot in buf.values():
            for key, val in slot.items():
                sums[key] += val
        for key, total in sums.items():
            if total > 1:
                raise FlowOverflow(f"node {s.id} holds {total} of edge {key} for round {t + 1}")
            if total == 1:
                for slot in buf.values():
                    slot.pop(key, None)
                if self.audit is not None:
                    self.audit.discards.append((s.id, key, t + 1, total))
        for p in [p for p, slot in buf.items() if not slot]:
            del buf[p]
        if buf:
            keys = sorted({k for slot in buf.values() for k in slot})
            self._mark_incomplete(s, t, keys)

    def _emit_flows(self, s: NodeState, t: int) -> dict:
        buf = s.out.pop(t, None)
        if not buf:
            return {}
        return {p: Bundle(flows=tuple(sorted(slot.items()))) for p, slot in buf.items()}


def in_flight(states) -> bool:
    """Whether any node still has flow scheduled for a future round."""
    return any(any(s.out.get(t) for t in s.out) for s in states)


@dataclass
class DfncRun:
    states: list
    rounds: int
    trace: congest.Trace
    audit: Optional[Audit]
    snapshots: list  # snapshots[r] = per-node (cid, pred, r0, r1) after protocol round r
    max_bits: int = 0

    def registers(self) -> list[tuple]:
        return [s.registers() for s in self.states]


def run_dfnc(graph: Graph, matching: Matching, r: int, *, audit: bool = False,
             snapshots: bool = False, record: bool = True,
             bit_budget: Optional[int] = None, seed: int = 0) -> DfncRun:
    """``r`` rounds of the rational variant."""
    aud = Audit() if audit else None
    proto = RationalDfnc(graph, matching, aud)
    return _drive(graph, proto, r, aud, snapshots, record, bit_budget, seed, None)


def _drive(graph, proto, r, aud, snapshots, record, bit_budget, seed, gamma) -> DfncRun:
    snaps: list = []

    def snap(engine_round, states):
        if engine_round >= proto.offset:
            snaps.append([s.registers() for s in states])

    res = congest.run(graph, proto, r + proto.offset, bit_budget=bit_budget, seed=seed,
                      gamma=gamma, record=record, snapshot=snap if snapshots else None)
    return DfncRun(res.states, res.rounds, res.trace, aud, snaps, res.max_bits)
