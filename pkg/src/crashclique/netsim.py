"""Synchronous round engine for a fully connected n-node network with crash faults.

Nodes carry public ids 1..n. Communication proceeds in synchronous rounds;
in each round every alive node may send one bounded message to every other
node. A crash budget of floor(alpha*n) nodes limits the adversary for the
whole run. A node crashing mid-round has an adversary-chosen subset of its
outgoing messages delivered; a node alive at the end of a round is never
suppressed. Receivers expecting a message from a crashing sender observe
BOTTOM (None) in its place.

Two driving styles share the same core:

* ``Engine.tick`` consumes a ``RoundSpec`` describing the round's edge set in
  bulk (used by the protocol layers, which apply their own vectorized
  effects from the returned delivery masks), and
* ``Engine.run_round`` / ``Engine.run_until`` drive per-node ``NodeProgram``
  objects and return per-round ``RoundOutcome`` records.

A node's message to itself is a local state update, never a wire message;
message counts cover ordered pairs of distinct nodes only.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

BOTTOM = None


class SimError(Exception):
    pass


class ConfigError(SimError):
    """Invalid configuration or parameters. CLI exit code 2."""


class InvariantViolation(SimError):
    """A guaranteed property failed at runtime. CLI exit code 3."""


class BandwidthExceeded(InvariantViolation):
    pass


class MaxRoundsExceeded(InvariantViolation):
    pass


class AdversaryError(SimError):
    """An adversary policy misbehaved. CLI exit code 4."""


class BudgetExceeded(AdversaryError):
    """Adversary requested crashes beyond floor(alpha*n)."""


@dataclass(frozen=True)
class SimConfig:
    n: int
    alpha: float = 0.0
    bandwidth_words: int = 4
    seed: int = 0
    max_rounds: int = 10_000_000

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n={self.n}: need at least 2 nodes")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError(f"alpha={self.alpha} outside [0, 1)")
        if self.bandwidth_words < 1:
            raise ConfigError(f"bandwidth_words={self.bandwidth_words} < 1")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds={self.max_rounds} < 1")

    @property
    def budget(self) -> int:
        return int(self.alpha * self.n)

    @property
    def word_bits(self) -> int:
        """Bits per message field: one ceil(log2 n)-bit word."""
        return max(1, (self.n - 1).bit_length())


@dataclass
class RoundSpec:
    """Bulk description of one round's traffic for the fast driver path.

    Exactly one of `senders` / `edges` is set, or neither for a silent round.
    `senders` is a bool[n] mask of broadcasting nodes (to all others);
    `edges` is a bool[n, n] matrix of intended (sender, receiver) pairs.
    `intents` optionally exposes per-node task attempts (public 1-based task
    ids, -1 for idle) to the adversary. Indices are 0-based internally.
    """

    kind: str
    senders: np.ndarray | None = None
    edges: np.ndarray | None = None
    fields: int = 0
    intents: np.ndarray | None = None


@dataclass
class RoundResult:
    round: int
    alive_before: np.ndarray
    alive_after: np.ndarray
    crashed: list[int]
    full_senders: np.ndarray | None = None
    partial: dict[int, np.ndarray] = field(default_factory=dict)
    deliv: np.ndarray | None = None


@dataclass
class RoundView:
    """What the adversary sees before deciding: full current-round knowledge."""

    round: int
    kind: str
    n: int
    alive: np.ndarray
    budget_left: int
    intents: np.ndarray | None


class CrashAdversary:
    """Base policy: never crashes anyone. Subclasses override decide().

    decide() returns a mapping {node0: deliver} where node0 is the 0-based
    index of a node crashing this round and deliver is None (deliver all of
    its outgoing messages) or a bool[n] receiver mask (deliver exactly the
    masked subset). The engine intersects masks with the round's intents.
    """

    name = "none"

    def bind(self, config: SimConfig) -> None:
        self.config = config

    def decide(self, view: RoundView) -> dict[int, np.ndarray | None]:
        return {}


@dataclass
class Message:
    sender: int
    receiver: int
    payload: tuple
    bit_size: int


@dataclass
class RoundOutcome:
    round: int
    delivered: list[Message]
    crashed_this_round: set[int]
    suppressed: set[tuple[int, int]]


@dataclass
class Broadcast:
    """Program send intent: same payload to every other node."""

    payload: tuple


@dataclass
class Unicast:
    receiver: int
    payload: tuple


class Engine:
    def __init__(self, config: SimConfig, adversary: CrashAdversary | None = None,
                 record_trace: bool = False):
        self.config = config
        self.n = config.n
        self.adversary = adversary if adversary is not None else CrashAdversary()
        self.adversary.bind(config)
        self.alive = np.ones(self.n, dtype=bool)
        self.round = 0
        self.crashes_total = 0
        self.messages_total = 0
        self.max_edge_bits = 0
        self.record_trace = record_trace
        self.trace_rows: list[tuple[int, int, int, int, int]] = []
        self.crash_rows: list[tuple[int, int]] = []
        self._inboxes: dict[int, dict[int, tuple | None]] = {}

    # ------------------------------------------------------------------
    # Core round step
    # ------------------------------------------------------------------

    def tick(self, spec: RoundSpec) -> RoundResult:
        if self.round >= self.config.max_rounds:
            raise MaxRoundsExceeded(f"round limit {self.config.max_rounds} reached")
        if spec.fields > self.config.bandwidth_words:
            raise BandwidthExceeded(
                f"{spec.fields} fields > bandwidth_words={self.config.bandwidth_words}")
        self.round += 1

        view = RoundView(self.round, spec.kind, self.n, self.alive.copy(),
                         self.config.budget - self.crashes_total, spec.intents)
        orders = self.adversary.decide(view)

        alive_before = self.alive.copy()
        crashed = sorted(orders)
        for node in crashed:
            if not alive_before[node]:
                raise AdversaryError(f"crash order for already-crashed node {node + 1}")
        if self.crashes_total + len(crashed) > self.config.budget:
            raise BudgetExceeded(
                f"round {self.round}: {len(crashed)} crashes would exceed "
                f"budget {self.config.budget} (spent {self.crashes_total})")
        for node in crashed:
            self.alive[node] = False
            self.crash_rows.append((self.round, node + 1))
        self.crashes_total += len(crashed)
        alive_after = self.alive.copy()

        result = RoundResult(self.round, alive_before, alive_after, crashed)
        delivered_count = 0

        if spec.senders is not None:
            senders = spec.senders & alive_before
            full = senders & alive_after
            result.full_senders = full
            for node in crashed:
                if senders[node]:
                    mask = self._deliver_mask(orders[node]) & alive_after
                    mask[node] = False
                    result.partial[node] = mask
            # full senders reach every other node alive at round end
            delivered_count = int(full.sum()) * max(0, int(alive_after.sum()) - 1)
            delivered_count += sum(int(m.sum()) for m in result.partial.values())
            if self.record_trace:
                self._trace_broadcast(spec, senders, full, result.partial, alive_after)
        elif spec.edges is not None:
            deliv = spec.edges & alive_before[:, None]
            np.fill_diagonal(deliv, False)
            intended = deliv.copy()
            for node in crashed:
                if deliv[node].any():
                    deliv[node] &= self._deliver_mask(orders[node])
            deliv = deliv & alive_after[None, :]
            result.deliv = deliv
            delivered_count = int(deliv.sum())
            if self.record_trace:
                self._trace_matrix(spec, intended, deliv, alive_after, crashed)

        if delivered_count:
            self.messages_total += delivered_count
            bits = spec.fields * self.config.word_bits
            if bits > self.max_edge_bits:
                self.max_edge_bits = bits
        return result

    def _deliver_mask(self, order) -> np.ndarray:
        if order is None:
            return np.ones(self.n, dtype=bool)
        mask = np.asarray(order, dtype=bool)
        if mask.shape != (self.n,):
            raise AdversaryError(f"deliver mask shape {mask.shape} != ({self.n},)")
        return mask.copy()

    def _trace_broadcast(self, spec, senders, full, partial, alive_after):
        bits = spec.fields * self.config.word_bits
        recv = np.flatnonzero(alive_after)
        for s in np.flatnonzero(senders):
            if full[s]:
                for r in recv:
                    if r != s:
                        self.trace_rows.append((self.round, s + 1, r + 1, bits, 0))
            else:
                mask = partial.get(int(s), np.zeros(self.n, dtype=bool))
                for r in recv:
                    if r != s:
                        flag = 0 if mask[r] else 1
                        self.trace_rows.append((self.round, s + 1, r + 1, bits, flag))

    def _trace_matrix(self, spec, intended, deliv, alive_after, crashed):
        bits = spec.fields * self.config.word_bits
        crashed_set = set(crashed)
        for s, r in zip(*np.nonzero(intended)):
            if deliv[s, r]:
                self.trace_rows.append((self.round, s + 1, r + 1, bits, 0))
            elif s in crashed_set and alive_after[r]:
                self.trace_rows.append((self.round, s + 1, r + 1, bits, 1))

    # ------------------------------------------------------------------
    # Per-node program driver
    # ------------------------------------------------------------------

    def run_round(self, programs: dict) -> RoundOutcome:
        """Run one round of per-node programs, returning its outcome.

        Each alive node's program is called as on_round(me, inbox) with the
        previous round's inbox (sender -> payload, BOTTOM for a suppressed
        one) and returns its sends: None, a Broadcast, or an iterable of
        Unicast / (receiver, payload) pairs.
        """
        n = self.n
        edges = np.zeros((n, n), dtype=bool)
        payloads: dict[tuple[int, int], tuple] = {}
        max_fields = 0
        for v in np.flatnonzero(self.alive):
            me = int(v) + 1
            sends = programs[me].on_round(me, self._inboxes.get(me, {}))
            for receiver, payload in self._normalize_sends(me, sends):
                payload = tuple(payload)
                if len(payload) > self.config.bandwidth_words:
                    raise BandwidthExceeded(
                        f"node {me} message of {len(payload)} fields to {receiver}")
                edges[v, receiver - 1] = True
                payloads[(int(v), receiver - 1)] = payload
                max_fields = max(max_fields, len(payload))

        result = self.tick(RoundSpec(kind="program", edges=edges, fields=max_fields))
        delivered = []
        suppressed = set()
        intended = edges & result.alive_before[:, None]
        for s, r in zip(*np.nonzero(intended)):
            s, r = int(s), int(r)
            if result.deliv[s, r]:
                payload = payloads[(s, r)]
                delivered.append(Message(s + 1, r + 1, payload,
                                         len(payload) * self.config.word_bits))
            elif s in result.crashed and result.alive_after[r]:
                suppressed.add((s + 1, r + 1))
        delivered.sort(key=lambda m: (m.sender, m.receiver))

        inboxes: dict[int, dict[int, tuple | None]] = {}
        for msg in delivered:
            inboxes.setdefault(msg.receiver, {})[msg.sender] = msg.payload
        for s1, r1 in suppressed:
            inboxes.setdefault(r1, {})[s1] = BOTTOM
        self._inboxes = inboxes
        return RoundOutcome(self.round, delivered,
                            {node + 1 for node in result.crashed}, suppressed)

    def _normalize_sends(self, me: int, sends):
        if sends is None:
            return
        if isinstance(sends, Broadcast):
            for r in range(1, self.n + 1):
                if r != me:
                    yield r, sends.payload
            return
        for item in sends:
            if isinstance(item, Broadcast):
                for r in range(1, self.n + 1):
                    if r != me:
                        yield r, item.payload
                continue
            if isinstance(item, Unicast):
                receiver, payload = item.receiver, item.payload
            else:
                receiver, payload = item
            if not 1 <= receiver <= self.n or receiver == me:
                raise ConfigError(f"node {me}: bad receiver {receiver}")
            yield receiver, payload

    def run_until(self, programs: dict, halt_predicate) -> list[RoundOutcome]:
        trace: list[RoundOutcome] = []
        while not halt_predicate(trace):
            if self.round >= self.config.max_rounds:
                raise MaxRoundsExceeded(f"no halt within {self.config.max_rounds} rounds")
            trace.append(self.run_round(programs))
        return trace

    # ------------------------------------------------------------------
    # Export
    # ------------------------------------------------------------------

    def trace_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["round", "sender", "receiver", "bits", "suppressed"])
        writer.writerows(self.trace_rows)
        return out.getvalue()

    def crash_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["round", "node"])
        writer.writerows(self.crash_rows)
        return out.getvalue()

    def write_trace_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.trace_csv())

    def write_crash_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.crash_csv())
