"""Iterative crash-resilient task completion with geometric assignment shrinking.

A run over m tasks proceeds in iterations. Iteration i guesses k_i =
ceil((1-eps)^(i-1) * m) tasks remain unverified. While k_i > 2B each node
draws its assignment from a (k_i, B, eps) covering family (node v takes the
tasks whose sets contain v); once k_i <= 2B every node takes every task and
the run ends after that iteration. Within an iteration each node attempts
its unknown tasks in ascending id order, one per slot of R rounds, across a
fixed window of 2B slots, idling when its list runs out; a final status
round broadcasts whether the node's whole list fit in the window, and every
receiver credits the full assignment of each survivor that reported success.

The ledger is the test oracle: it records ground-truth completions and
per-iteration (k_i, N_i) rows, where N_i counts tasks not yet known to every
alive node. Node-visible state is only C_v (the credited sets); the ledger
is never consulted by protocol logic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covering import FamilyParams, get_family
from .netsim import Engine, InvariantViolation, RoundSpec


class IncompleteAfterSchedule(InvariantViolation):
    """Tasks remained unverified at halt: over-budget adversary or broken task."""


def iteration_schedule(m: int, epsilon: float) -> list[int]:
    """k_1, k_2, ... while the raw geometric value stays >= 1."""
    if m < 1:
        raise ValueError(f"m={m} < 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon={epsilon} outside (0, 1)")
    out = []
    raw = float(m)
    while raw >= 1.0:
        out.append(int(np.ceil(raw)))
        raw *= 1.0 - epsilon
    return out


def schedule_until_exit(m: int, epsilon: float, B: int) -> int:
    """Iterations actually run: schedule position of the first k_i <= 2B."""
    for i, k in enumerate(iteration_schedule(m, epsilon), start=1):
        if k <= 2 * B:
            return i
    raise AssertionError("schedule always reaches k <= 2B before ending")


def tc_rounds(m: int, epsilon: float, B: int, R: int) -> int:
    """Exact round count of one instance: iterations x (2B*R + 1)."""
    return schedule_until_exit(m, epsilon, B) * (2 * B * R + 1)


def batched_rounds(n: int, M: int, epsilon: float, B: int, R: int) -> int:
    total = 0
    done = 0
    while done < M:
        size = min(n, M - done)
        total += tc_rounds(size, epsilon, B, R)
        done += size
    return total


@dataclass
class IterationRow:
    batch: int
    iteration: int
    k_i: int
    N_i: int
    crashes_so_far: int
    rounds_cumulative: int
    progress_ok: bool  # N_i <= k_i
    soundness_ok: bool  # every C_v a subset of ledger-completed


class TaskLedger:
    """Ground-truth completion record across all batches of a run."""

    def __init__(self, total_tasks: int):
        self.total_tasks = total_tasks
        self.completed = np.zeros(total_tasks, dtype=bool)
        self.completed_round = np.zeros(total_tasks, dtype=np.int64)
        self.rows: list[IterationRow] = []

    def complete_many(self, task_ids: np.ndarray, round_no: int) -> None:
        idx = np.unique(np.asarray(task_ids, dtype=np.int64)) - 1
        fresh = idx[~self.completed[idx]]
        self.completed[fresh] = True
        self.completed_round[fresh] = round_no

    @property
    def completed_count(self) -> int:
        return int(self.completed.sum())

    def incomplete_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.completed) + 1


class TaskModel:
    """What "executing a task" means; attempts take R engine rounds each."""

    R = 1
    tc: "TCInstance"

    def bind(self, tc: "TCInstance") -> None:
        self.tc = tc

    def begin_iteration(self, iteration: int, k_i: int) -> None:
        pass

    def run_slot(self, slot: int, executors: np.ndarray) -> None:
        raise NotImplementedError


class SilentTasks(TaskModel):
    """Abstract leader-safe tasks: R rounds of pure local work, no traffic."""

    def __init__(self, R: int = 1):
        if R < 1:
            raise ValueError(f"R={R} < 1")
        self.R = R

    def run_slot(self, slot: int, executors: np.ndarray) -> None:
        for _ in range(self.R):
            self.tc.silent_round(executors)


class TCInstance:
    """One task-completion run over a batch of globally numbered tasks."""

    def __init__(self, engine: Engine, task_ids: np.ndarray, B: int, epsilon: float,
                 model: TaskModel, ledger: TaskLedger, family_seed: int | None = None,
                 batch: int = 0):
        self.engine = engine
        self.task_ids = np.asarray(task_ids, dtype=np.int64)
        self.m = self.task_ids.shape[0]
        if self.m < 1:
            raise ValueError("empty task batch")
        self.B = B
        self.epsilon = epsilon
        self.model = model
        self.ledger = ledger
        self.family_seed = engine.config.seed if family_seed is None else family_seed
        self.batch = batch
        self.C = np.zeros((engine.n, self.m), dtype=bool)
        model.bind(self)

    def silent_round(self, executors: np.ndarray) -> None:
        intents = np.where(self.engine.alive & (executors > 0), executors, np.int64(-1))
        self.engine.tick(RoundSpec(kind="tc-work", fields=0, intents=intents))

    def run(self) -> int:
        engine = self.engine
        n, m, B = engine.n, self.m, self.B
        start_round = engine.round
        schedule = iteration_schedule(m, self.epsilon)

        for it, k in enumerate(schedule, start=1):
            self._record_boundary(it, k)
            if k > 2 * B:
                family = get_family(FamilyParams(n=n, m=m, k=k, B=B,
                                                 epsilon=self.epsilon,
                                                 seed=self.family_seed))
                T_mask = family.member.T
            else:
                T_mask = np.ones((n, m), dtype=bool)
            U = T_mask & ~self.C
            s_bits = U.sum(axis=1) <= 2 * B
            plan = _attempt_plan(U, 2 * B)
            self.model.begin_iteration(it, k)

            for t in range(2 * B):
                cols = plan[:, t]
                glob = np.where(cols >= 0,
                                self.task_ids[np.maximum(cols, 0)], np.int64(-1))
                self.model.run_slot(t + 1, glob)
                finished = engine.alive & (glob > 0)
                if finished.any():
                    self.ledger.complete_many(glob[finished], engine.round)

            res = engine.tick(RoundSpec(kind="tc-status",
                                        senders=engine.alive.copy(), fields=1))
            reporters = res.full_senders & s_bits
            if reporters.any():
                union = T_mask[reporters].any(axis=0)
                self.C |= res.alive_after[:, None] & union[None, :]
            for node, mask in res.partial.items():
                if s_bits[node]:
                    self.C |= mask[:, None] & T_mask[node][None, :]
            if k <= 2 * B:
                self._record_boundary(it + 1, k)
                break

        alive = engine.alive
        batch_done = self.ledger.completed[self.task_ids - 1]
        if not batch_done.all():
            missing = self.task_ids[~batch_done]
            raise IncompleteAfterSchedule(
                f"{missing.shape[0]} tasks never completed, e.g. {missing[:5].tolist()}")
        if not self.C[alive].all():
            raise IncompleteAfterSchedule("a surviving node is missing verifications")
        return engine.round - start_round

    def _record_boundary(self, iteration: int, k_i: int) -> None:
        engine = self.engine
        alive = engine.alive
        if alive.any():
            verified = self.C[alive].all(axis=0)
        else:
            verified = np.ones(self.m, dtype=bool)
        N_i = self.m - int(verified.sum())
        batch_done = self.ledger.completed[self.task_ids - 1]
        sound = not (self.C & ~batch_done[None, :]).any()
        self.ledger.rows.append(IterationRow(
            batch=self.batch, iteration=iteration, k_i=k_i, N_i=N_i,
            crashes_so_far=engine.crashes_total, rounds_cumulative=engine.round,
            progress_ok=N_i <= k_i, soundness_ok=sound))
        if not sound:
            raise InvariantViolation(
                f"batch {self.batch} iteration {iteration}: "
                "a node credits an uncompleted task")


def _attempt_plan(U: np.ndarray, width: int) -> np.ndarray:
    """First `width` set columns of each row of U, ascending, -1 padded."""
    n = U.shape[0]
    rows, cols = np.nonzero(U)
    starts = np.searchsorted(rows, np.arange(n), side="left")
    ends = np.searchsorted(rows, np.arange(n), side="right")
    take = np.minimum(ends - starts, width)
    plan = np.full((n, width), -1, dtype=np.int64)
    for t in range(width):
        sel = take > t
        plan[sel, t] = cols[starts[sel] + t]
    return plan


def run_task_completion(engine: Engine, m: int, B: int, epsilon: float,
                        model: TaskModel | None = None,
                        ledger: TaskLedger | None = None,
                        family_seed: int | None = None) -> tuple[int, TaskLedger]:
    """One batch over tasks 1..m. Returns (rounds used, ledger)."""
    if ledger is None:
        ledger = TaskLedger(m)
    if model is None:
        model = SilentTasks()
    tc = TCInstance(engine, np.arange(1, m + 1), B, epsilon, model, ledger,
                    family_seed=family_seed)
    rounds = tc.run()
    return rounds, ledger


def run_batched(engine: Engine, M: int, B: int, epsilon: float, R: int = 1,
                family_seed: int | None = None) -> tuple[int, TaskLedger]:
    """Complete M tasks in batches of up to n, carrying crash state across."""
    if M < 1:
        raise ValueError(f"M={M} < 1")
    ledger = TaskLedger(M)
    start_round = engine.round
    done = 0
    batch = 0
    while done < M:
        size = min(engine.n, M - done)
        ids = np.arange(done + 1, done + size + 1)
        tc = TCInstance(engine, ids, B, epsilon, SilentTasks(R), ledger,
                        family_seed=family_seed, batch=batch)
        tc.run()
        done += size
        batch += 1
    return engine.round - start_round, ledger
