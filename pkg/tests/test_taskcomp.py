from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crashclique import adversaries, taskcomp
from crashclique.netsim import Engine, InvariantViolation, SimConfig
from crashclique.taskcomp import (
    IncompleteAfterSchedule,
    SilentTasks,
    TaskLedger,
    TCInstance,
    _attempt_plan,
    batched_rounds,
    iteration_schedule,
    run_batched,
    run_task_completion,
    schedule_until_exit,
    tc_rounds,
)


def test_schedule_frozen_values():
    assert len(iteration_schedule(1000, 0.1)) == 66
    assert iteration_schedule(100, 0.1)[:3] == [100, 90, 81]
    assert iteration_schedule(1, 0.3) == [1]
    assert iteration_schedule(16, 0.3)[:3] == [16, 12, 8]


def test_schedule_shape():
    ks = iteration_schedule(500, 0.25)
    assert ks[0] == 500 and ks[-1] >= 1
    assert all(a >= b for a, b in zip(ks, ks[1:]))
    with pytest.raises(ValueError):
        iteration_schedule(0, 0.3)
    with pytest.raises(ValueError):
        iteration_schedule(10, 0.0)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 3000),
       eps=st.fractions(Fraction(1, 20), Fraction(9, 10), max_denominator=40))
def test_ceiling_chain_shrinks_geometrically(m, eps):
    # k_{i+1} never outruns one epsilon-shrink of the previous ceiling, and
    # the chain ends within a step of the ideal geometric horizon
    epsf = float(eps)
    ks = iteration_schedule(m, epsf)
    assert ks[0] == m and ks[-1] >= 1
    for prev, cur in zip(ks, ks[1:]):
        assert cur <= int(np.ceil(prev * (1.0 - epsf)))
    horizon = np.log(m) / -np.log(1.0 - epsf) if m > 1 else 0.0
    assert len(ks) <= int(horizon) + 2


def test_round_formulas():
    assert schedule_until_exit(32, 0.3, 4) == 5
    assert schedule_until_exit(6, 0.3, 4) == 1
    assert tc_rounds(32, 0.3, 4, 1) == 45
    assert tc_rounds(32, 0.3, 4, 3) == 125
    assert tc_rounds(6, 0.3, 4, 1) == 9
    assert batched_rounds(16, 40, 0.3, 4, 1) == (tc_rounds(16, 0.3, 4, 1) * 2
                                                 + tc_rounds(8, 0.3, 4, 1))


def test_attempt_plan_takes_first_columns_ascending():
    U = np.array([[1, 0, 1, 1],
                  [0, 0, 0, 0],
                  [1, 1, 1, 1]], dtype=bool)
    plan = _attempt_plan(U, 2)
    assert plan.tolist() == [[0, 2], [-1, -1], [0, 1]]
    wide = _attempt_plan(U, 5)
    assert wide[0].tolist() == [0, 2, 3, -1, -1]


def test_fault_free_run_completes_on_schedule():
    engine = Engine(SimConfig(n=32, alpha=0.25))
    rounds, ledger = run_task_completion(engine, 32, 4, 0.3)
    assert rounds == tc_rounds(32, 0.3, 4, 1)
    assert ledger.completed.all()
    assert ledger.rows[0].N_i == 32
    assert ledger.rows[-1].N_i == 0
    assert all(row.progress_ok and row.soundness_ok for row in ledger.rows)


@pytest.mark.parametrize("name", adversaries.SUITE)
def test_progress_and_soundness_hold_under_every_adversary(name):
    adversary = adversaries.build(name)
    engine = Engine(SimConfig(n=64, alpha=0.5, seed=3), adversary)
    rounds, ledger = run_task_completion(engine, 64, 4, 0.3)
    assert rounds == tc_rounds(64, 0.3, 4, 1)
    assert ledger.completed.all()
    assert all(row.N_i <= row.k_i for row in ledger.rows)
    assert all(row.soundness_ok for row in ledger.rows)
    assert engine.crashes_total <= engine.config.budget


def test_rounds_do_not_depend_on_the_adversary():
    totals = set()
    for name in adversaries.SUITE:
        engine = Engine(SimConfig(n=64, alpha=0.25, seed=1),
                        adversaries.build(name))
        rounds, _ = run_task_completion(engine, 64, 4, 0.3)
        totals.add(rounds)
    assert len(totals) == 1


def test_attempts_cost_R_rounds_each():
    engine = Engine(SimConfig(n=16, alpha=0.25))
    ledger = TaskLedger(16)
    tc = TCInstance(engine, np.arange(1, 17), 4, 0.3, SilentTasks(3), ledger)
    assert tc.run() == tc_rounds(16, 0.3, 4, 3)


def test_batched_runs_share_crash_state():
    adversary = adversaries.FrontloadAdversary()
    engine = Engine(SimConfig(n=16, alpha=0.25, seed=0), adversary)
    rounds, ledger = run_batched(engine, 64, 4, 0.3)
    assert rounds == batched_rounds(16, 64, 0.3, 4, 1)
    assert ledger.completed.all()
    assert {row.batch for row in ledger.rows} == {0, 1, 2, 3}
    # the whole budget burns in round 1 of batch 0, later batches stay clean
    assert engine.crash_rows == [(1, 1), (1, 2), (1, 3), (1, 4)]
    with pytest.raises(ValueError):
        run_batched(engine, 0, 4, 0.3)


def test_incomplete_after_schedule_is_detected(monkeypatch):
    monkeypatch.setattr(taskcomp, "iteration_schedule", lambda m, eps: [])
    engine = Engine(SimConfig(n=8, alpha=0.25))
    with pytest.raises(IncompleteAfterSchedule):
        run_task_completion(engine, 8, 4, 0.3)


def test_unsound_credit_raises():
    engine = Engine(SimConfig(n=8, alpha=0.25))
    ledger = TaskLedger(8)
    tc = TCInstance(engine, np.arange(1, 9), 4, 0.3, SilentTasks(), ledger)
    tc.C[0, 5] = True  # node 1 credits task 6, which nothing completed
    with pytest.raises(InvariantViolation):
        tc._record_boundary(1, 8)
    assert not tc.ledger.rows[-1].soundness_ok


def test_ledger_records_first_completion_only():
    ledger = TaskLedger(4)
    ledger.complete_many(np.array([2, 3]), 5)
    ledger.complete_many(np.array([3, 4]), 9)
    assert ledger.completed_round.tolist() == [0, 5, 5, 9]
    assert ledger.completed_count == 3
    assert ledger.incomplete_ids().tolist() == [1]


def test_empty_task_batch_rejected():
    engine = Engine(SimConfig(n=4))
    with pytest.raises(ValueError):
        TCInstance(engine, np.array([], dtype=np.int64), 4, 0.3,
                   SilentTasks(), TaskLedger(1))
    with pytest.raises(ValueError):
        SilentTasks(0)
