import dataclasses

import numpy as np
import pytest

from crashclique.harness import (
    METRICS_HEADER,
    MetricsRow,
    Scenario,
    explain,
    fit_growth,
    iteration_csv,
    load_scenario,
    metrics_csv,
    parse_scenario,
    phase_csv,
    run_one,
    run_scenario,
    scaling_sweep,
    step_csv,
)
from crashclique.netsim import ConfigError
from crashclique.taskcomp import batched_rounds, tc_rounds


def test_parse_scenario_both_forms():
    s = parse_scenario("""
        # a comment
        name = demo
        n = 64
        alpha 0.5
        adversary random   # trailing comment
        seed = 9
    """)
    assert s.name == "demo" and s.n == 64
    assert s.alpha == 0.5 and s.adversary == "random" and s.seed == 9


def test_parse_scenario_diagnostics():
    with pytest.raises(ConfigError, match="<scenario>:2"):
        parse_scenario("n = 8\nwat = 1\n")
    with pytest.raises(ConfigError, match="bad value"):
        parse_scenario("n = soon\n")


def test_load_scenario(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("experiment = run-sim\nalgorithm = token\nT = 1\nn = 16\n")
    s = load_scenario(str(path))
    assert s.experiment == "run-sim" and s.algorithm == "token"


def test_resolved_defaults():
    s = Scenario(n=48).resolved()
    assert s.M == 48 and s.m == 48 and s.k == 6
    assert Scenario(n=48, B=16).resolved().k == 24


def test_resolved_theory_mode_overrides():
    s = Scenario(alpha=0.5, mode="theory").resolved()
    assert s.epsilon == pytest.approx(1 / 13)
    assert s.B > 1000


def test_resolved_validation():
    with pytest.raises(ConfigError):
        Scenario(experiment="fuzz").resolved()
    with pytest.raises(ConfigError):
        Scenario(mode="vibes").resolved()
    with pytest.raises(ConfigError):
        Scenario(repetitions=0).resolved()
    with pytest.raises(ConfigError):
        Scenario(B=128).resolved()


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("CRASHCLIQUE_SEED", "77")
    assert Scenario(seed=3).resolved().seed == 77
    monkeypatch.setenv("CRASHCLIQUE_SEED", "many")
    with pytest.raises(ConfigError):
        Scenario().resolved()


def test_explain_lists_every_field():
    text = explain(Scenario(n=16))
    for field in dataclasses.fields(Scenario):
        assert f"{field.name} = " in text


def test_run_tc_metrics():
    art = run_one(Scenario(n=32, adversary="frontload"), wallclock=False)
    row = art.metrics
    assert row.rounds_total == tc_rounds(32, 0.3, 4, 1)
    assert row.crashes_total == 8
    assert row.iterations == len(art.ledger.rows) - 1
    assert row.wallclock == 0.0
    assert art.ledger.completed.all()


def test_repetitions_use_the_same_seed():
    arts = run_scenario(Scenario(n=32, adversary="random", repetitions=3,
                                 seed=5), wallclock=False)
    rows = [dataclasses.replace(a.metrics, rep=0) for a in arts]
    assert rows[0] == rows[1] == rows[2]


def test_run_batched_iteration_count():
    art = run_one(Scenario(n=16, M=64), wallclock=False)
    assert art.metrics.rounds_total == batched_rounds(16, 64, 0.3, 4, 1)
    batches = 4
    assert art.metrics.iterations == len(art.ledger.rows) - batches


def test_run_sim_experiment():
    art = run_one(Scenario(experiment="run-sim", n=16, T=1,
                           algorithm="echo"), wallclock=False)
    assert art.metrics.rounds_total == 2574
    assert art.sim is not None and art.ledger is None
    assert art.metrics.iterations == 1


def test_lowerbound_experiment_forces_its_shape():
    art = run_one(Scenario(experiment="lowerbound", n=256, alpha=0.5, R=3,
                           M=999), wallclock=False)
    assert art.adversary.name == "lowerbound"
    assert [s.target_size for s in art.adversary.steps] == [16]
    assert art.metrics.rounds_total == tc_rounds(256, 0.3, 4, 1)


def test_family_experiment():
    art = run_one(Scenario(experiment="family", n=256, B=4), wallclock=False)
    assert art.family_report.ok
    assert art.certificate.pass_fraction >= 0.99
    assert art.metrics.iterations == 256


def test_csv_writers():
    art = run_one(Scenario(n=16, adversary="frontload"), wallclock=False)
    text = metrics_csv([art.metrics])
    lines = text.splitlines()
    assert lines[0] == ",".join(METRICS_HEADER)
    assert len(lines) == 2

    text = iteration_csv(art.ledger.rows)
    assert text.splitlines()[0] == "iteration,k_i,N_i,crashes_so_far,rounds_cumulative"
    first = text.splitlines()[1].split(",")
    assert first[0] == "1" and first[1] == "16"

    sim_art = run_one(Scenario(experiment="run-sim", n=16, T=1), wallclock=False)
    text = phase_csv(sim_art.sim.rows)
    assert text.splitlines()[0] == "r,phase,rounds,crashes"
    assert len(text.splitlines()) == 3

    lb_art = run_one(Scenario(experiment="lowerbound", n=256, alpha=0.5),
                     wallclock=False)
    text = step_csv(lb_art.adversary.steps)
    assert text.splitlines()[0] == (
        "step,round,target_size,crashed,alive_before,pool_size,attempt_limit")
    assert len(text.splitlines()) == 2


def test_scaling_sweep_validation():
    base = Scenario(n=64)
    with pytest.raises(ConfigError):
        scaling_sweep(base, [64, 128])
    with pytest.raises(ConfigError):
        scaling_sweep(base, [48, 64, 128])


def test_scaling_sweep_small():
    report = scaling_sweep(Scenario(alpha=0.25), [16, 32, 64],
                           suite=("none", "frontload"))
    assert len(report.rows) == 6
    by_n = {}
    for row in report.rows:
        assert row.rounds == tc_rounds(row.n, 0.3, 4, 1)
        by_n.setdefault(row.n, set()).add(row.rounds)
    assert all(len(v) == 1 for v in by_n.values())
    assert report.spread >= 1.0
    assert report.csv().splitlines()[0] == "n,adversary,rounds,ratio"


def test_fit_growth_tracks_the_schedule():
    coef, dev = fit_growth(64, [1, 2, 4, 8])
    assert coef.shape == (2,)
    assert 1.0 <= dev < 4.0
    with pytest.raises(ConfigError):
        fit_growth(64, [2])
