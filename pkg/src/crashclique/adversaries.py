"""Crash policies: scripted, random, frontload, targeted, and the task-starving
schedule that tracks a shrinking set of attempted tasks.

Every policy sees the full round view (alive set, remaining budget, per-node
task intents where the protocol exposes them) before delivery, decides which
nodes crash this round, and chooses per-crasher delivered subsets. No policy
ever exceeds the budget of floor(alpha*n) total crashes; the task-starving
policy treats running out of budget as a hard bug and aborts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .netsim import AdversaryError, ConfigError, CrashAdversary, RoundView, SimConfig


class BudgetWouldExceed(AdversaryError):
    """The task-starving schedule priced a step above the remaining budget."""


class ScriptedAdversary(CrashAdversary):
    """Fixed plan: {round: [(node_id, deliver), ...]} with 1-based node ids.

    deliver is "all", "none", or an iterable of 1-based receiver ids.
    """

    name = "scripted"

    def __init__(self, plan: dict):
        self.plan = plan

    def decide(self, view: RoundView):
        orders = {}
        for node, deliver in self.plan.get(view.round, []):
            if not 1 <= node <= view.n:
                raise ConfigError(f"scripted crash of unknown node {node}")
            if deliver == "all":
                mask = None
            elif deliver == "none":
                mask = np.zeros(view.n, dtype=bool)
            else:
                mask = np.zeros(view.n, dtype=bool)
                for r in deliver:
                    mask[r - 1] = True
            orders[node - 1] = mask
        return orders


class RandomAdversary(CrashAdversary):
    """Each alive node crashes with probability p per round, budget permitting;
    a crasher's delivered subset is an independent fair coin per receiver."""

    name = "random"

    def __init__(self, p: float = 0.02):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"crash probability {p} outside [0, 1]")
        self.p = p

    def bind(self, config: SimConfig) -> None:
        super().bind(config)
        self.stream = rng.stream("adv-random", config.n, config.alpha,
                                 repr(float(self.p)), config.seed)
        self.spent = 0

    def decide(self, view: RoundView):
        left = view.budget_left
        if left <= 0:
            return {}
        draws = self.stream.random(view.n)
        candidates = np.flatnonzero(view.alive & (draws < self.p))[:left]
        return {int(node): self.stream.random(view.n) < 0.5 for node in candidates}


class FrontloadAdversary(CrashAdversary):
    """Spends the whole budget in round 1 on the lowest ids, suppressing all."""

    name = "frontload"

    def decide(self, view: RoundView):
        if view.round != 1:
            return {}
        zeros = np.zeros(view.n, dtype=bool)
        return {node: zeros for node in range(view.budget_left)}


class TargetedAdversary(CrashAdversary):
    """Crashes every node observed attempting one configured task id."""

    name = "targeted"

    def __init__(self, target: int = 1):
        if target < 1:
            raise ConfigError(f"target task id {target} < 1")
        self.target = target

    def decide(self, view: RoundView):
        if view.intents is None or view.budget_left <= 0:
            return {}
        hits = np.flatnonzero(view.alive & (view.intents == self.target))
        hits = hits[: view.budget_left]
        zeros = np.zeros(view.n, dtype=bool)
        return {int(node): zeros for node in hits}


@dataclass
class StarveStep:
    step: int
    round: int
    target_size: int
    crashed: int
    alive_before: int
    pool_size: int
    attempt_limit: int


class TaskStarvingAdversary(CrashAdversary):
    """Keeps a shrinking task set incomplete by crashing exactly its attempters.

    Defined for runs with R=1 and one task per node count (M=n). At its i-th
    consecutive work round it picks floor(alpha*n / log2(n)^i) tasks from the
    previous pool with the fewest attempting nodes this round (ties by lowest
    task id) and crashes all their attempters. Averaging over the pool keeps
    each pick at or below floor(2*n'/k') attempters, so the step sum stays
    within the budget; the policy halts once the target drops below C or
    stops halving, and never touches idle nodes.
    """

    name = "lowerbound"

    def __init__(self, C: int = 4):
        self.C = C

    def bind(self, config: SimConfig) -> None:
        super().bind(config)
        if config.n < 2 or math.log2(config.n) <= 1.0:
            raise ConfigError(f"n={config.n} too small for the schedule")
        self.pool = np.arange(1, config.n + 1, dtype=np.int64)
        self.step = 0
        self.halted = False
        self.steps: list[StarveStep] = []

    def decide(self, view: RoundView):
        if self.halted or view.kind != "tc-work":
            return {}
        if view.intents is None:
            raise AdversaryError("work round without task intents")
        i = self.step + 1
        size = int(self.config.alpha * view.n / math.log2(view.n) ** i)
        if size < self.C or 2 * size > self.pool.shape[0]:
            self.halted = True
            return {}

        attempts = view.intents[view.alive & (view.intents > 0)]
        tasks, counts = np.unique(attempts, return_counts=True)
        count_of = dict(zip(tasks.tolist(), counts.tolist()))
        pool_counts = np.array([count_of.get(int(t), 0) for t in self.pool])
        order = np.lexsort((self.pool, pool_counts))
        picked = self.pool[order[:size]]

        n_alive = int(view.alive.sum())
        prev_pool = self.pool.shape[0]
        limit = (2 * n_alive) // prev_pool
        worst = int(pool_counts[order[:size]].max())
        if worst > limit:
            raise AdversaryError(
                f"step {i}: picked task attempted {worst} times > 2n'/k' = {limit}")

        victims = np.flatnonzero(view.alive & np.isin(view.intents, picked))
        if victims.shape[0] > view.budget_left:
            raise BudgetWouldExceed(
                f"step {i} needs {victims.shape[0]} crashes, "
                f"budget left {view.budget_left}")

        self.pool = np.sort(picked)
        self.step = i
        self.steps.append(StarveStep(
            step=i, round=view.round, target_size=size,
            crashed=victims.shape[0], alive_before=n_alive,
            pool_size=prev_pool, attempt_limit=limit))
        zeros = np.zeros(view.n, dtype=bool)
        return {int(node): zeros for node in victims}


SUITE = ("none", "random", "frontload", "targeted", "lowerbound")


def build(name: str, **kwargs) -> CrashAdversary:
    if name == "none":
        return CrashAdversary()
    if name == "random":
        return RandomAdversary(p=kwargs.get("p", 0.02))
    if name == "frontload":
        return FrontloadAdversary()
    if name == "targeted":
        return TargetedAdversary(target=kwargs.get("target", 1))
    if name == "lowerbound":
        return TaskStarvingAdversary(C=kwargs.get("C", 4))
    if name == "scripted":
        return ScriptedAdversary(kwargs["plan"])
    raise ConfigError(f"unknown adversary {name!r}")
