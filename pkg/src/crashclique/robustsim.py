"""Runs a crash-free clique algorithm on a crash-prone network.

The simulated algorithm never sees a failure: per simulated round r, every
node's outgoing message row is computed and archived by redundant executors
(phase "messages"), then each receiver's incoming word column is collected
and archived (phase "delivery"). Both phases run as task-completion loops,
so any executor that crashes mid-task is replaced and the archive converges
to the same values regardless of who finished which task.

Archive keys: value kind 0 holds node ell's state material for round r
(r = 0 is the initial state, r >= 1 the word column received in round r-1),
kind 1 holds ell's message row for round r. Key ids are
(2r + kind) * n + (ell - 1), so a T-round run needs 2n(T+1) ids.

Extra wire formats on top of the storage ones (field words per message):
  identity   (collected-for id)        1
  pair-send  (collected-for id, word)  2
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netsim import ConfigError, Engine, InvariantViolation, RoundSpec
from .storage import SymbolStore, check_key_capacity, retrieve_phase, store_phase
from .taskcomp import TaskLedger, TaskModel, TCInstance, tc_rounds

KIND_STATE = 0
KIND_MESSAGE = 1


class SimAlgorithm:
    """A deterministic n-node clique algorithm, one word per ordered pair
    per round. States and words are field symbols in [0, n)."""

    name = "base"

    def initial(self, ell: int, n: int, seed: int) -> list[int]:
        raise NotImplementedError

    def message(self, ell: int, r: int, state: list[int]) -> list[int]:
        """Word j of the result goes to node j+1."""
        raise NotImplementedError

    def update(self, ell: int, r: int, state: list[int],
               column: list[int]) -> list[int]:
        """column[j] is the word node j+1 sent to ell in round r."""
        raise NotImplementedError


class EchoAlgorithm(SimAlgorithm):
    """Each node forwards exactly what it heard last round."""

    name = "echo"

    def initial(self, ell, n, seed):
        return [(ell - 1 + seed + j) % n for j in range(n)]

    def message(self, ell, r, state):
        return list(state)

    def update(self, ell, r, state, column):
        return list(column)


class AllPairsSum(SimAlgorithm):
    """Every pair exchanges a rotating summand; states accumulate mod n."""

    name = "allpairs"

    def initial(self, ell, n, seed):
        return [(ell - 1) * (j + 1 + seed) % n for j in range(n)]

    def message(self, ell, r, state):
        return [(w + ell + r) % len(state) for w in state]

    def update(self, ell, r, state, column):
        return [(a + b) % len(state) for a, b in zip(state, column)]


class TokenRing(SimAlgorithm):
    """A single token hops to the successor node every round."""

    name = "token"

    def initial(self, ell, n, seed):
        return [int(ell == seed % n + 1)] + [0] * (n - 1)

    def message(self, ell, r, state):
        n = len(state)
        return [state[0] if j == ell % n else 0 for j in range(n)]

    def update(self, ell, r, state, column):
        return [int(any(column))] + [0] * (len(state) - 1)


class PrefixSums(SimAlgorithm):
    """Nodes trade running prefix sums of their state vectors."""

    name = "prefixsum"

    def initial(self, ell, n, seed):
        return [(seed + ell * (j + 1)) % n for j in range(n)]

    def message(self, ell, r, state):
        n = len(state)
        out, acc = [], 0
        for w in state:
            acc = (acc + w) % n
            out.append(acc)
        return out

    def update(self, ell, r, state, column):
        return [(a + b) % len(state) for a, b in zip(state, column)]


ALGORITHMS = {cls.name: cls for cls in
              (EchoAlgorithm, AllPairsSum, TokenRing, PrefixSums)}


def build_algorithm(name: str) -> SimAlgorithm:
    try:
        return ALGORITHMS[name]()
    except KeyError:
        raise ConfigError(f"unknown algorithm {name!r}") from None


def reference_states(algorithm: SimAlgorithm, n: int, T: int,
                     seed: int) -> np.ndarray:
    """Fault-free ground truth: [n, n] state matrix after T rounds."""
    states = [algorithm.initial(ell, n, seed) for ell in range(1, n + 1)]
    for r in range(T):
        rows = [algorithm.message(ell, r, states[ell - 1])
                for ell in range(1, n + 1)]
        states = [algorithm.update(ell, r, states[ell - 1],
                                   [rows[j][ell - 1] for j in range(n)])
                  for ell in range(1, n + 1)]
    return np.array(states, dtype=np.int64)


@dataclass
class SimPhaseRow:
    r: int
    phase: str
    rounds: int
    crashes: int


class _CMModel(TaskModel):
    """Task ell: rebuild ell's state for round r and archive its message row.

    One slot = r+1 retrieves (initial state, then each received column),
    a local replay, and one store of the message row.
    """

    def __init__(self, sim: "RobustSimulation", r: int):
        self.sim = sim
        self.r = r
        self.R = (r + 1) * (1 + sim.parts) + sim.parts

    def run_slot(self, slot: int, executors: np.ndarray) -> None:
        sim, r = self.sim, self.r
        engine = sim.engine
        blobs: dict[int, list[list[int]]] = {
            int(w): [] for w in np.flatnonzero((executors > 0) & engine.alive)}
        for i in range(r + 1):
            requests = {w: sim.key_of(KIND_STATE, i, int(executors[w]))
                        for w in blobs}
            results, _ = retrieve_phase(
                engine, sim.store, requests, {w: sim.n for w in requests},
                min_parts=sim.parts, intents=executors)
            for w in list(blobs):
                if w in results:
                    blobs[w].append(results[w])
                else:
                    del blobs[w]
        writers = {}
        for w, history in blobs.items():
            ell = int(executors[w])
            state = sim.replay(ell, history)
            row = sim.algorithm.message(ell, r, state)
            writers[w] = (sim.key_of(KIND_MESSAGE, r, ell), row)
        store_phase(engine, sim.store, writers,
                    min_parts=sim.parts, intents=executors)


class _InnerModel(TaskModel):
    """Task t: fetch sender t's message row and hand every current collector
    the word for the node it is collecting for."""

    def __init__(self, sim: "RobustSimulation", r: int,
                 idview: np.ndarray, s_acc: np.ndarray):
        self.sim = sim
        self.r = r
        self.idview = idview
        self.s_acc = s_acc
        self.R = (1 + sim.parts) + 1

    def run_slot(self, slot: int, executors: np.ndarray) -> None:
        sim, engine = self.sim, self.sim.engine
        requests = {int(w): sim.key_of(KIND_MESSAGE, self.r, int(executors[w]))
                    for w in np.flatnonzero((executors > 0) & engine.alive)}
        results, _ = retrieve_phase(
            engine, sim.store, requests, {w: sim.n for w in requests},
            min_parts=sim.parts, intents=executors)
        rows = {w: np.asarray(results[w], dtype=np.int64) for w in results}

        edges = np.zeros((sim.n, sim.n), dtype=bool)
        for w in rows:
            edges[w] = self.idview[w] >= 1
        res = engine.tick(RoundSpec(kind="pair-send", edges=edges, fields=2,
                                    intents=executors))
        for w, row in rows.items():
            t = int(executors[w])
            jj = np.flatnonzero(res.deliv[w])
            if jj.shape[0]:
                self._collect(jj, t, row[self.idview[w, jj] - 1])
            if engine.alive[w] and self.idview[w, w] >= 1:
                self._collect(np.array([w]), t,
                              row[[self.idview[w, w] - 1]])

    def _collect(self, receivers: np.ndarray, t: int, words: np.ndarray) -> None:
        held = self.s_acc[receivers, t - 1]
        clash = (held >= 0) & (held != words)
        if clash.any():
            raise InvariantViolation(
                f"sender {t}: conflicting words for collectors "
                f"{(receivers[clash] + 1).tolist()}")
        self.s_acc[receivers, t - 1] = words


class _OuterModel(TaskModel):
    """Task ell: collect ell's incoming word column for round r and archive
    it. One slot = an identity broadcast, a full inner dissemination loop,
    and one store."""

    def __init__(self, sim: "RobustSimulation", r: int):
        self.sim = sim
        self.r = r
        inner = (1 + sim.parts) + 1
        self.R = 1 + tc_rounds(sim.n, sim.epsilon, sim.B, inner) + sim.parts

    def run_slot(self, slot: int, executors: np.ndarray) -> None:
        sim, r = self.sim, self.r
        engine, n = sim.engine, sim.n

        senders = (executors > 0) & engine.alive
        res = engine.tick(RoundSpec(kind="identity", senders=senders, fields=1,
                                    intents=executors))
        idview = np.full((n, n), -1, dtype=np.int64)
        for j in np.flatnonzero(res.full_senders):
            idview[res.alive_after, j] = executors[j]
        for j, mask in res.partial.items():
            idview[mask, j] = executors[j]
        for w in np.flatnonzero(senders & res.alive_before):
            idview[w, w] = executors[w]

        s_acc = np.full((n, n), -1, dtype=np.int64)
        inner = TCInstance(engine, np.arange(1, n + 1, dtype=np.int64),
                           sim.B, sim.epsilon,
                           model=_InnerModel(sim, r, idview, s_acc),
                           ledger=TaskLedger(n), family_seed=sim.family_seed)
        inner.run()

        writers = {}
        for w in np.flatnonzero((executors > 0) & engine.alive):
            column = s_acc[w]
            if (column < 0).any():
                raise InvariantViolation(
                    f"collector {w + 1}: column for node {executors[w]} "
                    f"is missing {int((column < 0).sum())} words")
            writers[int(w)] = (sim.key_of(KIND_STATE, r + 1, int(executors[w])),
                               column.tolist())
        store_phase(engine, sim.store, writers,
                    min_parts=sim.parts, intents=executors)


class RobustSimulation:
    """Drives T simulated rounds of an algorithm over one engine."""

    def __init__(self, engine: Engine, algorithm: SimAlgorithm, T: int,
                 B: int = 4, epsilon: float = 0.3,
                 family_seed: int | None = None):
        if T < 1:
            raise ConfigError(f"T={T} < 1")
        self.engine = engine
        self.algorithm = algorithm
        self.T = T
        self.B = B
        self.epsilon = epsilon
        self.n = engine.config.n
        self.family_seed = (engine.config.seed if family_seed is None
                           else family_seed)
        self.store = SymbolStore(self.n, engine.config.alpha)
        check_key_capacity(self.n, T, self.store.params.p)
        self.parts = self.store.parts_for(self.n)
        self.rows: list[SimPhaseRow] = []
        for ell in range(1, self.n + 1):
            self.store.preload(self.key_of(KIND_STATE, 0, ell),
                               algorithm.initial(ell, self.n, engine.config.seed))

    def key_of(self, kind: int, r: int, ell: int) -> int:
        return (2 * r + kind) * self.n + (ell - 1)

    def replay(self, ell: int, history: list[list[int]]) -> list[int]:
        state = list(history[0])
        for i, column in enumerate(history[1:]):
            state = self.algorithm.update(ell, i, state, column)
        return state

    def expected_rounds(self) -> int:
        """Closed-form schedule length; crash patterns cannot change it."""
        total = 0
        for r in range(self.T):
            cm = (r + 1) * (1 + self.parts) + self.parts
            total += tc_rounds(self.n, self.epsilon, self.B, cm)
        inner = (1 + self.parts) + 1
        outer = 1 + tc_rounds(self.n, self.epsilon, self.B, inner) + self.parts
        total += self.T * tc_rounds(self.n, self.epsilon, self.B, outer)
        return total

    def run(self) -> int:
        engine = self.engine
        task_ids = np.arange(1, self.n + 1, dtype=np.int64)
        start = engine.round
        for r in range(self.T):
            for phase, model in (("messages", _CMModel(self, r)),
                                 ("delivery", _OuterModel(self, r))):
                r0, c0 = engine.round, engine.crashes_total
                tc = TCInstance(engine, task_ids, self.B, self.epsilon,
                                model=model, ledger=TaskLedger(self.n),
                                family_seed=self.family_seed)
                tc.run()
                self.rows.append(SimPhaseRow(r, phase, engine.round - r0,
                                             engine.crashes_total - c0))
        return engine.round - start

    def archived_value(self, kind: int, r: int, ell: int) -> list[int]:
        """Decode an archive entry from what the surviving nodes hold."""
        key = self.key_of(kind, r, ell)
        rows = self.store.data.get(key)
        if rows is None:
            raise InvariantViolation(f"nothing archived under key {key}")
        out: list[int] = []
        for j in range(rows.shape[0]):
            received = rows[j].copy()
            received[~self.engine.alive] = -1
            out.extend(self.store.decode_part(key, j, received))
        return out[: self.n]

    def final_states(self) -> np.ndarray:
        """[n, n] matrix of simulated states after the run, per archive."""
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for ell in range(1, self.n + 1):
            history = [self.archived_value(KIND_STATE, i, ell)
                       for i in range(self.T + 1)]
            out[ell - 1] = self.replay(ell, history)
        return out


def run_robust_simulation(engine: Engine, algorithm_name: str, T: int,
                          B: int = 4, epsilon: float = 0.3) -> RobustSimulation:
    sim = RobustSimulation(engine, build_algorithm(algorithm_name), T,
                           B=B, epsilon=epsilon)
    sim.run()
    return sim
