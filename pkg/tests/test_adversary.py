import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathfair.adversary import (ADVANCE_CHAIN, ADVANCE_REUSE, NO_TACTIC, AdversaryState,
                                ConstantProductPool, PathClass, Tactic, TacticKind,
                                TacticPolicy, apply_tactic, classify_path, corrupt, delay_floor,
                                evaluate_sandwich, ground_truth, honest_timestamp, hub_types,
                                is_feasible, plan_sandwich)
from pathfair.assignment import BlockRandomness, Topology
from pathfair.core import HubType, SystemParams, TimestampKind, Transaction, classify_hub
from pathfair.routing import HONEST, Deviation

from conftest import World, make_path


def test_corrupt_sizes():
    assert corrupt(1, 10, 0).corrupted == frozenset()
    assert len(corrupt(1, 4, 1).corrupted) == 1
    assert corrupt(7, 64, 21).corrupted == corrupt(7, 64, 21).corrupted
    with pytest.raises(ValueError):
        corrupt(1, 9, 3)
    assert len(corrupt(1, 9, 3, bft=False).corrupted) == 3


def test_classify_path_cases():
    p = SystemParams(n=64, f=0, q=4, t=3, k=2)
    honest = AdversaryState(frozenset(), 64)
    top = Topology(BlockRandomness.derive(0, 0), p)
    assert all(classify_path(s, honest, p) is PathClass.REGULAR for s in top.paths())
    path = make_path((0, 1, 2, 3), (4, 5, 6, 7))
    assert classify_path(path, AdversaryState(frozenset({4, 5, 6}), 64), p) is PathClass.MIXED
    assert classify_path(path, AdversaryState(frozenset({2, 3}), 64), p) is PathClass.CONTAINS_IMPASSE
    bad = AdversaryState(frozenset(range(8)), 64)
    assert classify_path(path, bad, p) is PathClass.CORRUPTED


def _brute(kind, counts, t):
    # counts: list of (honest, corrupted) per hub
    k = len(counts)
    honest_ok = [h >= t for h, _ in counts]
    bad_only = [b >= t and h < t for h, b in counts]
    if kind is TacticKind.DELAY:
        return not all(honest_ok)
    if kind is TacticKind.ADVANCE_REUSE:
        # the reused timestamp must come from a hub the adversary does not own
        return any(all(bad_only[k - x:]) and not bad_only[k - x - 1] for x in range(1, k))
    if kind is TacticKind.ADVANCE_CHAIN:
        return any(bad_only[j] and bad_only[j + 1] for j in range(k - 1))
    if kind is TacticKind.FORGE:
        return all(bad_only)
    return True


@given(st.integers(3, 9), st.lists(st.integers(0, 9), min_size=1, max_size=6), st.data())
def test_feasibility_matches_power_check(q, bads, data):
    t = data.draw(st.integers(q // 2 + 1, q))
    counts = [(q - min(b, q), min(b, q)) for b in bads]
    types = [classify_hub(h, b, t) for h, b in counts]
    for kind in TacticKind:
        assert is_feasible(kind, types) == _brute(kind, counts, t)


def test_delay_adds_exact_amount():
    w = World(8, (2, 3), q=4, t=3, k=1, distribution="max")
    path = make_path((0, 1, 2, 3))
    adv = AdversaryState(w.sim.corrupted, 8)
    dev, ok = apply_tactic(path, Tactic.delay(100), adv, w.params)
    assert ok and dev.delay_hub == 0
    trav = w.launch(path, dev)
    w.run()
    kind, cf = ground_truth(trav)
    assert kind is TimestampKind.DELAYED
    assert trav.certificate.locked_ts == cf + 100


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["iterative", "recursive"]), st.integers(0, 2**31), st.integers(0, 200))
def test_delay_above_floor_is_strictly_later(mode, seed, extra):
    rng = np.random.default_rng(seed)
    n = 30
    bad = tuple(int(x) for x in rng.choice(n, 9, replace=False))
    w = World(n, bad, q=4, t=3, k=2, mode=mode, seed=seed, skew=2)
    adv = AdversaryState(w.sim.corrupted, n)
    top = Topology(BlockRandomness.derive(seed, 0), w.params)
    travs = []
    for p in range(n):
        path = top.path(p)
        dev, ok = apply_tactic(path, Tactic.delay(delay_floor(w.params) + extra), adv, w.params)
        if ok:
            travs.append(w.launch(path, dev, tx=Transaction.synthetic(p, 0)))
    w.run()
    for trav in travs:
        kind, cf = ground_truth(trav)
        if trav.completed:
            assert kind is TimestampKind.DELAYED and trav.certificate.locked_ts > cf


@pytest.mark.parametrize("mode", ["iterative", "recursive"])
def test_advance_reuse_takes_earlier_hub_time(mode):
    w = World(10, (4, 5, 6, 7), q=4, t=3, k=2, mode=mode, distribution="max")
    path = make_path((0, 1, 2, 3), (4, 5, 6, 7))
    adv = AdversaryState(w.sim.corrupted, 10)
    dev, ok = apply_tactic(path, ADVANCE_REUSE, adv, w.params)
    assert ok and dev.reuse_from == 1
    trav = w.launch(path, dev)
    w.run()
    first, last = trav.certificate.approvals
    assert last.timestamp == first.timestamp == trav.certificate.locked_ts
    kind, cf = ground_truth(trav)
    assert kind is TimestampKind.ADVANCED and cf > trav.certificate.locked_ts


def test_forge_needs_corrupted_path():
    p = SystemParams(n=10, f=3, q=4, t=3, k=2)
    path = make_path((0, 1, 2, 3), (4, 5, 6, 7))
    adv = AdversaryState(frozenset({1, 2, 3}), 10)
    assert apply_tactic(path, Tactic.forge(0), adv, p) == (HONEST, False)
    assert apply_tactic(path, ADVANCE_CHAIN, adv, p) == (HONEST, False)
    dev, ok = apply_tactic(path, NO_TACTIC, adv, p)
    assert ok and not dev.active
    full = AdversaryState(frozenset(range(8)), 10)
    dev, ok = apply_tactic(path, Tactic.forge(-9), full, p)
    assert ok and dev == Deviation(forge=True, forge_ts=-9)


@pytest.mark.parametrize("mode", ["iterative", "recursive"])
def test_forged_certificate_is_arbitrary(mode):
    w = World(10, tuple(range(8)), q=4, t=3, k=2, mode=mode, distribution="max")
    path = make_path((0, 1, 2, 3), (4, 5, 6, 7))
    trav = w.launch(path, Deviation(forge=True, forge_ts=-5))
    w.run()
    assert ground_truth(trav)[0] is TimestampKind.ARBITRARY
    assert trav.certificate.locked_ts == -5


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["iterative", "recursive"]), st.integers(0, 2**31))
def test_counterfactual_routes_agree(mode, seed):
    rng = np.random.default_rng(seed)
    n = 30
    bad = tuple(int(x) for x in rng.choice(n, 9, replace=False))
    w = World(n, bad, q=4, t=3, k=3, mode=mode, seed=seed, skew=2)
    adv = AdversaryState(w.sim.corrupted, n)
    policy = TacticPolicy(stall_fraction=0.2)
    top = Topology(BlockRandomness.derive(seed, 0), w.params)
    tactic_rng = np.random.default_rng(seed)
    travs = []
    for p in range(n):
        path = top.path(p)
        dev, _ = apply_tactic(path, policy.choose(tactic_rng, path, adv, w.params), adv, w.params)
        travs.append(w.launch(path, dev, tx=Transaction.synthetic(p, int(rng.integers(0, 50)))))
    w.run()
    for trav in travs:
        assert honest_timestamp(trav) == honest_timestamp(trav, event_replay=True)


def test_policy_consumes_fixed_draws():
    p = SystemParams(n=10, f=3, q=4, t=3, k=2)
    regular = make_path((0, 1, 2, 3), (4, 5, 6, 7))
    adv = AdversaryState(frozenset({8, 9}), 10)
    a = np.random.default_rng(1)
    b = np.random.default_rng(1)
    assert TacticPolicy().choose(a, regular, adv, p) is NO_TACTIC
    b.random(4)
    assert a.random() == b.random()


def test_sandwich_planning_and_replay():
    p = SystemParams(n=10, f=3, delta_net=10)
    pool = ConstantProductPool(1e6, 1e6)
    blind = plan_sandwich(b"v", math.inf, 100, p, pool, victim_amount=1e4, front_amount=1e4)
    assert not blind.feasible and blind.expected_loss > 0
    plan = plan_sandwich(b"v", 50, 100, p, pool, victim_amount=1e4, front_amount=1e4)
    assert plan.feasible and plan.lead == 20
    assert not plan_sandwich(b"v", 80, 100, p, pool, victim_amount=1e4, front_amount=1e4).feasible
    won = evaluate_sandwich(plan, [b"f", b"v", b"b"], b"f", b"b", pool)
    assert won.success and won.profit > 0
    lost = evaluate_sandwich(plan, [b"v", b"f", b"b"], b"f", b"b", pool)
    assert not lost.success and lost.profit < 0


def test_pool_round_trip_loses_fee():
    pool = ConstantProductPool(1000.0, 1000.0)
    y = pool.swap_x_for_y(10.0)
    assert pool.swap_y_for_x(y) < 10.0
    assert pool.reserve_x * pool.reserve_y >= 1000.0 * 1000.0
