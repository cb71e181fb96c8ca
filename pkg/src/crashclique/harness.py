"""Scenario files, experiment execution, metrics, and scaling sweeps.

A scenario is a flat key-value text file (``key = value`` per line, ``#``
comments). The experiment key picks what runs: ``family`` generates and
certifies a covering family, ``run-tc`` runs the task-completion loop,
``run-sim`` runs the fault-masking simulation, ``lowerbound`` runs the
task-starving schedule against the R=1 loop. Every run prints a
``scenario=<name> seed=<n>`` banner and is bit-reproducible from it.
"""
from __future__ import annotations

import dataclasses
import io
import csv
import math
import os
import time

import numpy as np

from . import adversaries, covering, robustsim, taskcomp
from .netsim import ConfigError, Engine, SimConfig

EXPERIMENTS = ("family", "run-tc", "run-sim", "lowerbound")


@dataclasses.dataclass
class Scenario:
    name: str = "scenario"
    experiment: str = "run-tc"
    n: int = 32
    M: int = 0               # 0 = one task per node
    T: int = 2
    R: int = 1
    alpha: float = 0.25
    B: int = 4
    epsilon: float = 0.3
    mode: str = "practical"  # "theory" derives B and epsilon from alpha
    adversary: str = "none"
    p: float = 0.02          # random adversary crash probability
    target: int = 1          # targeted adversary task id
    algorithm: str = "echo"
    seed: int = 0
    repetitions: int = 1
    m: int = 0               # family experiment: 0 = n sets
    k: int = 0               # family experiment: 0 = 3B/2
    samples: int = 1000

    def resolved(self) -> "Scenario":
        """Apply defaults, the seed env override, and the mode."""
        s = dataclasses.replace(self)
        env = os.environ.get("CRASHCLIQUE_SEED")
        if env is not None:
            try:
                s.seed = int(env)
            except ValueError:
                raise ConfigError(f"CRASHCLIQUE_SEED={env!r} is not an integer")
        if s.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {s.experiment!r}")
        if s.mode == "theory":
            eps, _, B = covering.derive_constants(s.alpha)
            s.epsilon, s.B = eps, B
        elif s.mode == "practical":
            covering.validate_practical(s.B, s.epsilon)
        else:
            raise ConfigError(f"unknown mode {s.mode!r}")
        if s.M == 0:
            s.M = s.n
        if s.m == 0:
            s.m = s.n
        if s.k == 0:
            s.k = min(s.m, max(s.B, 3 * s.B // 2))
        if s.repetitions < 1:
            raise ConfigError(f"repetitions={s.repetitions} < 1")
        return s


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Scenario)}


def parse_scenario(text: str, origin: str = "<scenario>") -> Scenario:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        else:
            key, _, val = line.partition(" ")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
        caster = float if _FIELD_TYPES[key] == "float" else (
            int if _FIELD_TYPES[key] == "int" else str)
        try:
            values[key] = caster(val)
        except ValueError:
            raise ConfigError(
                f"{origin}:{lineno}: bad value {val!r} for {key}") from None
    return Scenario(**values)


def load_scenario(path: str) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read(), origin=path)


def explain(scenario: Scenario) -> str:
    s = scenario.resolved()
    lines = [f"{f.name} = {getattr(s, f.name)}"
             for f in dataclasses.fields(s)]
    return "\n".join(lines)


@dataclasses.dataclass
class MetricsRow:
    scenario: str
    rep: int
    rounds_total: int
    crashes_total: int
    iterations: int
    messages_total: int
    max_edge_bits: int
    wallclock: float


METRICS_HEADER = ("scenario", "rep", "rounds_total", "crashes_total",
                  "iterations", "messages_total", "max_edge_bits", "wallclock")


def metrics_csv(rows: list[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(METRICS_HEADER)
    for r in rows:
        writer.writerow([r.scenario, r.rep, r.rounds_total, r.crashes_total,
                         r.iterations, r.messages_total, r.max_edge_bits,
                         f"{r.wallclock:.6f}"])
    return buf.getvalue()


def iteration_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("iteration", "k_i", "N_i", "crashes_so_far",
                     "rounds_cumulative"))
    for r in rows:
        writer.writerow([r.iteration, r.k_i, r.N_i, r.crashes_so_far,
                         r.rounds_cumulative])
    return buf.getvalue()


def phase_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("r", "phase", "rounds", "crashes"))
    for row in rows:
        writer.writerow([row.r, row.phase, row.rounds, row.crashes])
    return buf.getvalue()


def step_csv(steps) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("step", "round", "target_size", "crashed",
                     "alive_before", "pool_size", "attempt_limit"))
    for s in steps:
        writer.writerow([s.step, s.round, s.target_size, s.crashed,
                         s.alive_before, s.pool_size, s.attempt_limit])
    return buf.getvalue()


@dataclasses.dataclass
class RunArtifacts:
    """Everything one repetition produced, for CSV export and assertions."""
    metrics: MetricsRow
    engine: Engine | None = None
    ledger: taskcomp.TaskLedger | None = None
    sim: robustsim.RobustSimulation | None = None
    adversary: object = None
    family_report: object = None
    certificate: object = None


def _build_adversary(s: Scenario):
    kwargs = {}
    if s.adversary == "random":
        kwargs["p"] = s.p
    elif s.adversary == "targeted":
        kwargs["target"] = s.target
    return adversaries.build(s.adversary, **kwargs)


def run_one(scenario: Scenario, rep: int = 0, record_trace: bool = False,
            wallclock: bool = True) -> RunArtifacts:
    s = scenario.resolved()
    t0 = time.perf_counter()

    if s.experiment == "family":
        params = covering.FamilyParams(n=s.n, m=s.m, k=s.k, B=s.B,
                                       epsilon=s.epsilon, seed=s.seed)
        family = covering.get_family(params)
        report = covering.verify_size_bounds(family)
        cert = covering.certify_load_balance(family, s.k, s.samples,
                                             rng_seed=s.seed)
        elapsed = time.perf_counter() - t0 if wallclock else 0.0
        row = MetricsRow(s.name, rep, 0, 0, s.m, 0, 0, elapsed)
        return RunArtifacts(metrics=row, family_report=report,
                            certificate=cert)

    if s.experiment == "lowerbound":
        s = dataclasses.replace(s, adversary="lowerbound", R=1, M=s.n)

    adversary = _build_adversary(s)
    config = SimConfig(n=s.n, alpha=s.alpha, seed=s.seed)
    engine = Engine(config, adversary, record_trace=record_trace)

    ledger = None
    sim = None
    if s.experiment in ("run-tc", "lowerbound"):
        _, ledger = taskcomp.run_batched(engine, s.M, s.B, s.epsilon, R=s.R)
        batches = -(-s.M // s.n)
        iterations = len(ledger.rows) - batches
    else:
        sim = robustsim.RobustSimulation(
            engine, robustsim.build_algorithm(s.algorithm), s.T,
            B=s.B, epsilon=s.epsilon)
        sim.run()
        iterations = s.T

    elapsed = time.perf_counter() - t0 if wallclock else 0.0
    row = MetricsRow(s.name, rep, engine.round, engine.crashes_total,
                     iterations, engine.messages_total, engine.max_edge_bits,
                     elapsed)
    return RunArtifacts(metrics=row, engine=engine, ledger=ledger, sim=sim,
                        adversary=adversary)


def run_scenario(scenario: Scenario, record_trace: bool = False,
                 wallclock: bool = True) -> list[RunArtifacts]:
    """All repetitions of one scenario; same seed each rep by design."""
    s = scenario.resolved()
    return [run_one(s, rep, record_trace=record_trace, wallclock=wallclock)
            for rep in range(s.repetitions)]


@dataclasses.dataclass
class SweepRow:
    n: int
    adversary: str
    rounds: int
    ratio: float


@dataclasses.dataclass
class SweepReport:
    rows: list[SweepRow]
    spread: float

    def csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(("n", "adversary", "rounds", "ratio"))
        for r in self.rows:
            writer.writerow([r.n, r.adversary, r.rounds, f"{r.ratio:.6f}"])
        return buf.getvalue()


def scaling_sweep(base: Scenario, n_values: list[int],
                  suite: tuple[str, ...] | None = None) -> SweepReport:
    """Run the scenario at each n across the adversary suite.

    Needs at least three power-of-two sizes; reports rounds / log2(n) per
    run and the max/min spread of the per-n worst ratios.
    """
    if len(n_values) < 3:
        raise ConfigError(f"sweep needs >= 3 sizes, got {len(n_values)}")
    for n in n_values:
        if n < 2 or n & (n - 1):
            raise ConfigError(f"sweep size {n} is not a power of two")
    if suite is None:
        suite = tuple(name for name in adversaries.SUITE
                      if name != "lowerbound" or base.R == 1)
    rows = []
    worst: dict[int, float] = {}
    for n in n_values:
        for name in suite:
            s = dataclasses.replace(base, n=n, M=0, adversary=name)
            art = run_one(s, wallclock=False)
            ratio = art.metrics.rounds_total / math.log2(n)
            rows.append(SweepRow(n, name, art.metrics.rounds_total, ratio))
            worst[n] = max(worst.get(n, 0.0), ratio)
    spread = max(worst.values()) / min(worst.values())
    return SweepReport(rows=rows, spread=spread)


def fit_growth(n: int, t_values: list[int], B: int = 4,
               epsilon: float = 0.3, alpha: float = 0.25,
               seed: int = 0) -> tuple[np.ndarray, float]:
    """Least-squares fit of simulation cost c1*T^2*log n + c2*T*log^2 n.

    Returns the coefficients and the worst multiplicative deviation of the
    observed schedule lengths from the fit.
    """
    if len(t_values) < 2:
        raise ConfigError("need >= 2 T values to fit")
    costs = []
    for T in t_values:
        config = SimConfig(n=n, alpha=alpha, seed=seed)
        engine = Engine(config)
        sim = robustsim.RobustSimulation(
            engine, robustsim.EchoAlgorithm(), T, B=B, epsilon=epsilon)
        costs.append(sim.expected_rounds())
    logn = math.log2(n)
    design = np.array([[T * T * logn, T * logn * logn] for T in t_values])
    observed = np.array(costs, dtype=float)
    coef, *_ = np.linalg.lstsq(design, observed, rcond=None)
    fitted = design @ coef
    with np.errstate(divide="ignore"):
        dev = float(np.max(np.maximum(fitted / observed, observed / fitted)))
    return coef, dev
