import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathfair.simnet import (CONSENSUS, ClockModel, NetModel, SimulationError, Simulator,
                            stream, trial_seed)


def sim(n=4, corrupted=(), delta=10, skew=0):
    clock = ClockModel.perfect(n) if not skew else ClockModel.sample(n, skew, 1)
    return Simulator(clock, NetModel(delta), corrupted)


def test_fifo_tie_break_and_empty_queue():
    s = sim()
    fired = []
    s.schedule(5, fired.append, "A")
    s.schedule(5, fired.append, "B")
    s.schedule(1, fired.append, "C")
    assert s.run() == 3
    assert fired == ["C", "A", "B"]
    assert sim().run() == 0


def test_random_events_fire_in_due_then_sequence_order():
    s = sim()
    rng = np.random.default_rng(0)
    dues = rng.integers(0, 500, size=10_000)
    fired = []
    for i, due in enumerate(dues):
        s.schedule(int(due), fired.append, i)
    s.run()
    assert fired == sorted(range(len(dues)), key=lambda i: (dues[i], i))


def test_schedule_into_past_raises():
    s = sim()
    s.schedule(10, lambda: None)
    s.run()
    with pytest.raises(SimulationError):
        s.schedule(3, lambda: None)


def test_run_until_stops_early():
    s = sim()
    fired = []
    for t in (1, 5, 9):
        s.schedule(t, fired.append, t)
    s.run(until=5)
    assert fired == [1, 5] and s.now == 5 and s.pending() == 1


def test_delay_bounds():
    s = sim(corrupted={2, 3})
    got = []
    s.send(0, 1, 10, lambda: got.append(s.now))
    s.send(2, 3, 7, lambda: got.append(s.now))  # colluding nodes: instant
    s.send(2, 0, 0, lambda: got.append(s.now))  # adversary may undercut the honest floor
    s.run()
    assert sorted(got) == [0, 0, 10]
    for bad in (0, 11):
        with pytest.raises(SimulationError):
            s.send(0, 1, bad, lambda: None)
    with pytest.raises(SimulationError):
        s.send(2, CONSENSUS, 11, lambda: None)


def test_net_model_draws_within_bounds_and_repeat():
    net = NetModel(10, 1)
    a = net.sample(stream(4, "delays"), 1000)
    b = net.sample(stream(4, "delays"), 1000)
    assert a.min() >= 1 and a.max() <= 10
    assert np.array_equal(a, b)
    assert (NetModel(10, 1, "max").sample(None, 3) == 10).all()
    with pytest.raises(ValueError):
        NetModel(5, 6)


@settings(max_examples=50)
@given(st.integers(0, 5), st.integers(1, 50), st.integers(0, 2**32))
def test_clock_reads_within_skew(skew, n, seed):
    clock = ClockModel.sample(n, skew, seed)
    s = Simulator(clock, NetModel(10))
    s.now = 1000
    reads = [s.read_clock(i) for i in range(n)]
    assert all(abs(r - 1000) <= skew for r in reads)
    assert max(reads) - min(reads) <= 2 * skew


def test_perfect_clock_reads_true_time():
    s = sim()
    s.now = 42
    assert [s.read_clock(i) for i in range(4)] == [42] * 4
    with pytest.raises(ValueError):
        ClockModel((3,), 2)


def test_streams_are_independent_and_stable():
    a = stream(9, "delays").integers(0, 2**31, size=5)
    stream(9, "paths").integers(0, 10, size=100)
    b = stream(9, "delays").integers(0, 2**31, size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, stream(9, "offsets").integers(0, 2**31, size=5))
    seeds = {trial_seed(1, i) for i in range(100)}
    assert len(seeds) == 100
    assert trial_seed(1, 3) == trial_seed(1, 3)


def test_trace_lines():
    buf = io.StringIO()
    s = Simulator(ClockModel.perfect(2), NetModel(10), trace=buf)
    s.schedule(3, lambda: None)
    s.run()
    row = json.loads(buf.getvalue().splitlines()[0])
    assert row["t"] == 3 and row["seq"] == 0
