import numpy as np
import pytest

from crashclique.adversaries import ScriptedAdversary
from crashclique.netsim import ConfigError, Engine, SimConfig
from crashclique.storage import (
    StoreConflict,
    SymbolStore,
    check_key_capacity,
    key_digits,
    key_from_digits,
    net_retrieve,
    net_store,
    retrieve_phase,
    store_phase,
)


def test_key_digit_roundtrip():
    p = 17
    for key in (0, 1, 16, 17, 288):
        hi, lo = key_digits(key, p)
        assert 0 <= hi < p and 0 <= lo < p
        assert key_from_digits(hi, lo, p) == key
    with pytest.raises(ConfigError):
        key_digits(p * p, p)
    with pytest.raises(ConfigError):
        key_digits(-1, p)


def test_key_capacity_bound():
    check_key_capacity(16, 8, 17)  # 2*16*9 = 288 < 289
    with pytest.raises(ConfigError):
        check_key_capacity(16, 9, 17)
    with pytest.raises(ConfigError):
        check_key_capacity(4, 3, 5)


def test_parts_for():
    store = SymbolStore(16, 0.25)  # K = 11
    assert store.K == 11
    assert store.parts_for(1) == 1
    assert store.parts_for(11) == 1
    assert store.parts_for(12) == 2
    assert store.parts_for(55) == 5


def test_store_then_retrieve_roundtrip():
    engine = Engine(SimConfig(n=16, alpha=0.25))
    store = SymbolStore(16, 0.25)
    value = list(range(16))
    rounds = net_store(engine, store, 3, 7, value)
    assert rounds == store.parts_for(16) == 2
    got, rounds = net_retrieve(engine, store, 9, 7, 16)
    assert rounds == 1 + 2
    assert got == value


def test_round_counts_scale_with_length():
    store0 = SymbolStore(16, 0.25)
    K = store0.K
    for mult in (1, 2, 5):
        engine = Engine(SimConfig(n=16, alpha=0.25))
        store = SymbolStore(16, 0.25)
        value = [(3 * i) % 17 for i in range(mult * K)]
        assert net_store(engine, store, 0, 5, value) == mult
        got, rounds = net_retrieve(engine, store, 15, 5, len(value))
        assert rounds == 1 + mult
        assert got == value


def test_min_parts_pads_the_phase():
    engine = Engine(SimConfig(n=8, alpha=0.25))
    store = SymbolStore(8, 0.25)
    assert store_phase(engine, store, {}, min_parts=3) == 3
    assert engine.round == 3
    results, rounds = retrieve_phase(engine, store, {}, {}, min_parts=2)
    assert results == {} and rounds == 3
    assert engine.round == 6


def test_conflicting_write_raises():
    store = SymbolStore(8, 0.25)
    store.write(1, 0, 2, 5, 1)
    store.write(1, 0, 2, 5, 1)  # same value is fine
    with pytest.raises(StoreConflict):
        store.write(1, 0, 2, 6, 1)
    with pytest.raises(ConfigError):
        store.write(1, 0, 3, 5, 2)  # parts mismatch


def test_preload_seeds_every_holder():
    engine = Engine(SimConfig(n=8, alpha=0.25))
    store = SymbolStore(8, 0.25)
    store.preload(4, [1, 2, 3])
    assert (store.data[4] >= 0).all()
    got, _ = net_retrieve(engine, store, 6, 4, 3)
    assert got == [1, 2, 3]


def test_retrieve_survives_holder_crashes():
    # crash two holders mid-reply; K=5 of 8 survivors still decode
    adversary = ScriptedAdversary({2: [(1, "none"), (2, "none")]})
    engine = Engine(SimConfig(n=8, alpha=0.25), adversary)
    store = SymbolStore(8, 0.25)
    value = [9, 8, 7, 6, 5]
    net_store(engine, store, 4, 11, value)
    got, _ = net_retrieve(engine, store, 5, 11, len(value))
    assert got == value
    assert engine.crashes_total == 2


def test_dead_requester_gets_nothing():
    adversary = ScriptedAdversary({2: [(3, "none")]})
    engine = Engine(SimConfig(n=8, alpha=0.25), adversary)
    store = SymbolStore(8, 0.25)
    net_store(engine, store, 0, 2, [1, 2, 3])
    got, rounds = net_retrieve(engine, store, 2, 2, 3)
    assert got is None
    assert rounds == 2  # the schedule length does not depend on crashes


def test_mid_store_crash_leaves_a_consistent_partial_row():
    # writer crashes during the store round delivering to half the nodes;
    # the store keeps exactly the delivered symbols plus the writer's own
    adversary = ScriptedAdversary({1: [(1, [2, 3, 4, 5])]})
    engine = Engine(SimConfig(n=8, alpha=0.25), adversary)
    store = SymbolStore(8, 0.25)
    store_phase(engine, store, {0: (3, [5, 5, 5, 5, 5])})
    row = store.data[3][0]
    assert (row[:5] >= 0).all()
    assert (row[5:] == -1).all()
    # a later writer of the same value fills the gaps without conflict
    engine2 = Engine(SimConfig(n=8, alpha=0.25))
    engine2.alive = engine.alive.copy()
    store_phase(engine2, store, {1: (3, [5, 5, 5, 5, 5])})
    assert (store.data[3][0, 1:] >= 0).all()


def test_decode_results_are_cached():
    engine = Engine(SimConfig(n=8, alpha=0.25))
    store = SymbolStore(8, 0.25)
    net_store(engine, store, 0, 9, [4, 3, 2, 1, 0])
    net_retrieve(engine, store, 1, 9, 5)
    assert (9, 0) in store._decoded
    net_retrieve(engine, store, 2, 9, 5)
    assert store._decoded[(9, 0)] == [4, 3, 2, 1, 0]
