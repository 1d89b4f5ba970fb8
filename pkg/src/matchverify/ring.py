"""Bounded-message flows: one element of Z/gamma per edge per round.

Instead of carrying sets of ``(edge, fraction)`` records, every flow
message is a single residue modulo ``gamma = n**c``.  Before the first
token round each node sends an independent random nonce over each of its
edges.  A generation on ``e = {u, w}`` with ``u < w`` hands ``w`` the nonce
``tau(u, e)`` and ``u`` its negation, so the two halves cancel exactly
where the rational variant would see a whole unit.  A node sums what it
receives in a round; a non-zero sum is scheduled like a rational flow and
later split into uniformly random shares, one per predecessor, with one
randomly chosen *poor* predecessor absorbing the remainder.

An optional attribution mode runs a shadow bookkeeping of which part of
each residue belongs to which generated edge.  It uses a separate random
stream, so production values are the same with or without it.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import congest
from .dfnc import Audit, Bundle, DfncBase, DfncRun, NodeState, ProtocolViolation, _drive
from .graphcore import Graph, Matching, edge_key

DEFAULT_GAMMA_EXP = 4


@dataclass(frozen=True)
class RingParams:
    gamma: int
    c: Optional[int] = None

    @classmethod
    def for_graph(cls, n: int, c: int = DEFAULT_GAMMA_EXP) -> "RingParams":
        return cls(max(2, n) ** c, c)

    def fits(self, n: int, budget: Optional[int] = None) -> bool:
        budget = congest.default_bit_budget(n) if budget is None else budget
        framing = congest.KIND_TAG_BITS + 4 + congest.id_bits(n) + 1
        return congest.BitCodec(n, self.gamma).ring_bits <= budget - framing


def ring_flow_generation(u: int, w: int, tau_u: int, gamma: int) -> dict[int, int]:
    """Receipts for a generation on ``{u, w}`` given the smaller endpoint's nonce."""
    lo, hi = min(u, w), max(u, w)
    return {hi: tau_u % gamma, lo: (-tau_u) % gamma}


def split_shares(value: int, preds: list[int], gamma: int, rng: random.Random) -> dict[int, int]:
    """Random additive shares of ``value`` over ``preds`` (sorted)."""
    if len(preds) == 1:
        return {preds[0]: value % gamma}
    poor = rng.choice(preds)
    shares = {}
    for p in preds:
        if p != poor:
            shares[p] = rng.randrange(gamma)
    shares[poor] = (value - sum(shares.values())) % gamma
    return shares


def _shadow_rng(seed: int, v: int) -> random.Random:
    state = np.random.SeedSequence([int(seed), int(v), 1]).generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


@dataclass
class RingAudit(Audit):
    """Attribution of residues to generated edges."""

    # (node, key, round, value): e-part of what a node received in a round
    received: list = field(default_factory=list)
    # (node, dst, key, round, value): e-part of what a node sent to dst in a round
    sent: list = field(default_factory=list)
    # (node, round): rounds whose total receipt summed to zero and were dropped
    cancelled: list = field(default_factory=list)


class RingDfnc(DfncBase):
    offset = 1

    def __init__(self, graph: Graph, matching: Matching, gamma: int,
                 audit: Optional[RingAudit] = None, seed: int = 0):
        super().__init__(graph, matching, audit)
        self.gamma = gamma
        self.seed = seed

    def init(self, view):
        s = super().init(view)
        s.extra["tau_out"] = {u: view.rng.randrange(self.gamma) for u in view.neighbors}
        s.extra["tau_in"] = {}
        if self.audit is not None:
            s.extra["shadow"] = _shadow_rng(self.seed, view.id)
            s.extra["parts"] = {}  # round -> {key: value}
        return s

    # nonce exchange occupies engine round 1
    def _pre_round(self, s, engine_round):
        return {u: Bundle(nonce=s.extra["tau_out"][u]) for u in s.neighbors}

    def _pre_receive(self, s, engine_round, inbox):
        for src, m in inbox.items():
            s.extra["tau_in"][src] = m.nonce

    # -- receipts -------------------------------------------------------------

    def _take_receipts(self, s: NodeState, t: int, inbox: dict) -> None:
        z = 0
        kinds = set()
        parts: dict = defaultdict(int)
        for src in sorted(inbox):
            m = inbox[src]
            if m.ring is None:
                continue
            z = (z + m.ring) % self.gamma
            kinds.add(s.kind(src))
            if self.audit is not None:
                for key, val in m.extra_parts:
                    parts[key] = (parts[key] + val) % self.gamma
        if kinds:
            self._accumulate(s, t, z, kinds, parts, t)

    def _generation_receipt(self, s, x, r_x, now):
        key = edge_key(s.id, x)
        if s.id < x:
            val = (-s.extra["tau_out"][x]) % self.gamma
        else:
            val = s.extra["tau_in"][x] % self.gamma
        self._accumulate(s, r_x, val, {s.kind(x)}, {key: val}, now)

    def _accumulate(self, s, t, z, kinds, parts, now):
        if self.audit is not None:
            for key, val in sorted(parts.items()):
                self.audit.received.append((s.id, key, t, val))
        if s.free:
            if self.audit is not None:
                for key, val in sorted(parts.items()):
                    self.audit.absorbed.append((s.id, key, t, val))
            return
        if z == 0:
            if self.audit is not None:
                self.audit.cancelled.append((s.id, t))
            return
        when = self._schedule(s, t, kinds, now)
        s.out[when] = (s.out.get(when, 0) + z) % self.gamma
        if self.audit is not None:
            bucket = s.extra["parts"].setdefault(when, {})
            for key, val in parts.items():
                bucket[key] = (bucket.get(key, 0) + val) % self.gamma
                self.audit.assigned.append((s.id, key, t, val, when))

    def _finalize(self, s: NodeState, t: int) -> None:
        if s.out.get(t + 1, 0) != 0:
            keys = ()
            if self.audit is not None:
                keys = tuple(sorted(k for k, v in s.extra["parts"].get(t + 1, {}).items() if v))
            self._mark_incomplete(s, t, keys)

    def _emit_flows(self, s: NodeState, t: int) -> dict:
        value = s.out.pop(t, 0)
        parts = s.extra["parts"].pop(t, {}) if self.audit is not None else {}
        if value == 0:
            return {}
        preds = sorted(s.pred)
        shares = split_shares(value, preds, self.gamma, s.rng)
        if self.audit is None:
            return {p: Bundle(ring=v) for p, v in shares.items()}
        split = self._shadow_split(s, shares, parts)
        out = {}
        for p, v in shares.items():
            out[p] = AttributedBundle(ring=v, extra_parts=tuple(sorted(split[p].items())))
            for key, val in sorted(split[p].items()):
                self.audit.sent.append((s.id, p, key, t, val))
        return out

    def _shadow_split(self, s, shares: dict, parts: dict) -> dict:
        """Per-edge shares that add up to each production share.

        Every predecessor but one (the last in id order) gets uniform
        per-key parts whose total is corrected to its production share on
        one residual key; the remaining predecessor gets what is left of
        every key.  Untracked residue (from cancellations) is kept under
        the key ``None``.
        """
        g = self.gamma
        keys = sorted(k for k in parts)
        total_parts = sum(parts.values()) % g
        value = sum(shares.values()) % g
        parts = dict(parts)
        residual = (value - total_parts) % g
        if residual:
            parts[None] = residual
            keys = keys + [None]
        preds = sorted(shares)
        rng = s.extra["shadow"]
        split = {p: {} for p in preds}
        remaining = dict(parts)
        for p in preds[:-1]:
            acc = 0
            for k in keys[:-1]:
                x = rng.randrange(g)
                split[p][k] = x
                acc += x
            split[p][keys[-1]] = (shares[p] - acc) % g
            for k in keys:
                remaining[k] = (remaining[k] - split[p][k]) % g
        split[preds[-1]] = remaining
        return split


@dataclass(frozen=True)
class AttributedBundle(Bundle):
    extra_parts: tuple = ()


def run_ring(graph: Graph, matching: Matching, r: int, *, gamma: Optional[int] = None,
             gamma_exp: int = DEFAULT_GAMMA_EXP, seed: int = 0, audit: bool = False,
             snapshots: bool = False, record: bool = True,
             bit_budget: Optional[int] = None) -> DfncRun:
    """``r`` protocol rounds (plus the nonce round) of the ring variant."""
    if gamma is None:
        gamma = RingParams.for_graph(graph.n, gamma_exp).gamma
    aud = RingAudit() if audit else None
    proto = RingDfnc(graph, matching, gamma, aud, seed)
    return _drive(graph, proto, r, aud, snapshots, record, bit_budget, seed, gamma)
