"""Crash-tolerant shared storage on top of the round engine.

A value is a list of field symbols. To store it under an integer key, the
writer splits it into parts of K symbols, encodes each part into an n-symbol
codeword, and spreads one symbol per node per round. Any node that later
broadcasts the key gets enough symbols back to decode as long as at most an
alpha fraction of nodes ever crash: the code keeps K below the guaranteed
number of survivors.

Wire formats (field words per message):
  store    (key_hi, key_lo, part, symbol)   4
  request  (key_hi, key_lo)                 2
  reply    (part, key_hi, key_lo, symbol)   4
Keys are split into two base-p digits, so all keys must stay below p*p.
"""
from __future__ import annotations

import numpy as np

from .erasure import Codec, TooManyErasures, codec_params_for
from .netsim import ConfigError, Engine, InvariantViolation, RoundSpec


class StoreConflict(InvariantViolation):
    """Two writers disagreed about the symbol at a held position."""


def key_digits(key: int, p: int) -> tuple[int, int]:
    if not 0 <= key < p * p:
        raise ConfigError(f"key {key} does not fit in two base-{p} digits")
    return key // p, key % p


def key_from_digits(hi: int, lo: int, p: int) -> int:
    return hi * p + lo


def check_key_capacity(n: int, T: int, p: int) -> None:
    """Room for the 2n(T+1) distinct keys a T-round simulation needs."""
    need = 2 * n * (T + 1)
    if need > p * p:
        raise ConfigError(f"key space needs {need} ids, p^2 = {p * p}")


class SymbolStore:
    """Who holds which symbol, plus a decode cache shared across retrievers.

    data[key] is a [parts, n] int64 array, -1 where the holder never received
    the symbol. Liveness is not tracked here; phases consult the engine.
    """

    def __init__(self, n: int, alpha: float):
        self.n = n
        self.params = codec_params_for(n, alpha)
        self.codec = Codec(self.params)
        self.data: dict[int, np.ndarray] = {}
        self._decoded: dict[tuple[int, int], list[int]] = {}

    @property
    def K(self) -> int:
        return self.params.K

    def parts_for(self, length: int) -> int:
        return -(-length // self.K)

    def _rows(self, key: int, parts: int) -> np.ndarray:
        rows = self.data.get(key)
        if rows is None:
            rows = np.full((parts, self.n), -1, dtype=np.int64)
            self.data[key] = rows
        elif rows.shape[0] != parts:
            raise ConfigError(f"key {key}: {parts} parts vs stored {rows.shape[0]}")
        return rows

    def write(self, key: int, part: int, node: int, symbol: int, parts: int) -> None:
        rows = self._rows(key, parts)
        held = rows[part, node]
        if held >= 0 and held != symbol:
            raise StoreConflict(
                f"key {key} part {part} node {node + 1}: {held} vs {symbol}")
        rows[part, node] = symbol

    def preload(self, key: int, symbols: list[int]) -> None:
        """Seed a fully held value, as if stored before round one."""
        parts = self.parts_for(len(symbols))
        rows = self._rows(key, parts)
        for j, row in enumerate(self.codewords(symbols)):
            held = rows[j]
            if ((held >= 0) & (held != row)).any():
                raise StoreConflict(f"key {key} part {j}: preload mismatch")
            rows[j] = row

    def codewords(self, symbols: list[int]) -> np.ndarray:
        """[parts, n] codeword matrix for a value, parts zero-padded to K."""
        parts = self.parts_for(len(symbols))
        padded = np.zeros((parts, self.K), dtype=np.int64)
        flat = np.asarray(symbols, dtype=np.int64)
        padded.reshape(-1)[: flat.shape[0]] = flat
        return np.stack([np.asarray(self.codec.encode(row.tolist()), dtype=np.int64)
                         for row in padded])

    def decode_part(self, key: int, part: int, received: np.ndarray) -> list[int]:
        """Decode one part from a retriever's view (-1 marks a missing symbol).

        The retriever must hold at least K symbols itself before the shared
        cache may answer for it; the first decoder fills the cache.
        """
        survivors = np.flatnonzero(received >= 0)
        if survivors.shape[0] < self.K:
            raise TooManyErasures(
                f"key {key} part {part}: {survivors.shape[0]} symbols < K={self.K}")
        cached = self._decoded.get((key, part))
        if cached is None:
            xs = survivors[: self.K]
            decoded = self.codec.decode_points(xs, received[xs])
            cached = [int(v) for v in decoded]
            self._decoded[(key, part)] = cached
        return cached


def store_phase(engine: Engine, store: SymbolStore,
                writers: dict[int, tuple[int, list[int]]],
                min_parts: int = 0,
                intents: np.ndarray | None = None) -> int:
    """Spread every writer's value, one part per round; returns rounds used.

    writers maps 0-based node -> (key, symbols). A writer that crashes
    mid-round seeds only the delivered holders; a later writer of the same
    key and value fills the gaps without conflict. min_parts pads the phase
    to a fixed length so schedules stay adversary-independent.
    """
    plans = {}
    max_parts = min_parts
    for node, (key, symbols) in writers.items():
        cw = store.codewords(symbols)
        plans[node] = (key, cw)
        max_parts = max(max_parts, cw.shape[0])
    n = engine.config.n
    for j in range(max_parts):
        edges = np.zeros((n, n), dtype=bool)
        for node, (key, cw) in plans.items():
            if j < cw.shape[0] and engine.alive[node]:
                edges[node, :] = True
        res = engine.tick(RoundSpec(kind="store", edges=edges, fields=4,
                                    intents=intents))
        for node, (key, cw) in plans.items():
            if j >= cw.shape[0] or not res.alive_before[node]:
                continue
            store.write(key, j, node, int(cw[j, node]), cw.shape[0])
            for w in np.flatnonzero(res.deliv[node]):
                store.write(key, j, int(w), int(cw[j, w]), cw.shape[0])
    return max_parts


def retrieve_phase(engine: Engine, store: SymbolStore,
                   requests: dict[int, int],
                   lengths: dict[int, int],
                   min_parts: int = 0,
                   intents: np.ndarray | None = None) -> tuple[dict[int, list[int]], int]:
    """One request broadcast, then one reply round per part.

    requests maps 0-based node -> key; lengths gives each value's symbol
    count. Returns ({node: symbols} for requesters alive at the end, rounds).
    Holders answer every request they saw; deliveries to nodes that died in
    the meantime simply vanish on the wire.
    """
    n = engine.config.n
    parts = {r: store.parts_for(lengths[r]) for r in requests}
    max_parts = max(list(parts.values()) + [min_parts], default=min_parts)

    senders = np.zeros(n, dtype=bool)
    for r in requests:
        senders[r] = engine.alive[r]
    res = engine.tick(RoundSpec(kind="retrieve-request", senders=senders, fields=2,
                                intents=intents))
    seen = {}
    for r in requests:
        if res.full_senders[r]:
            seen[r] = res.alive_after.copy()
        elif r in res.partial:
            seen[r] = res.partial[r].copy()
        else:
            seen[r] = np.zeros(n, dtype=bool)
        seen[r][r] = res.alive_before[r]

    acc = {r: np.full((parts[r], n), -1, dtype=np.int64) for r in requests}
    for j in range(max_parts):
        edges = np.zeros((n, n), dtype=bool)
        holds = {}
        for r, key in requests.items():
            if j >= parts[r]:
                continue
            rows = store.data.get(key)
            have = (rows[j] >= 0) if rows is not None else np.zeros(n, dtype=bool)
            holds[r] = have
            edges[:, r] = seen[r] & engine.alive & have
        res = engine.tick(RoundSpec(kind="retrieve-reply", edges=edges, fields=4,
                                    intents=intents))
        for r, key in requests.items():
            if j >= parts[r]:
                continue
            got = res.deliv[:, r]
            if got.any():
                acc[r][j, got] = store.data[key][j, got]
            if engine.alive[r] and holds[r][r]:
                acc[r][j, r] = store.data[key][j, r]

    results = {}
    for r, key in requests.items():
        if not engine.alive[r]:
            continue
        out: list[int] = []
        for j in range(parts[r]):
            out.extend(store.decode_part(key, j, acc[r][j]))
        results[r] = out[: lengths[r]]
    return results, 1 + max_parts


def net_store(engine: Engine, store: SymbolStore, node: int, key: int,
              symbols: list[int]) -> int:
    """Store one value from one node; returns the rounds spent."""
    return store_phase(engine, store, {node: (key, symbols)})


def net_retrieve(engine: Engine, store: SymbolStore, node: int, key: int,
                 length: int) -> tuple[list[int] | None, int]:
    """Retrieve one value to one node; (symbols or None if dead, rounds)."""
    results, rounds = retrieve_phase(engine, store, {node: key}, {node: length})
    return results.get(node), rounds
