import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathfair.consensus import (CensorshipMode, CensorshipModel, Consensus,
                                place_late_timestamp)
from pathfair.core import Certificate, HubApproval, SystemParams, Transaction
from pathfair.ordering import canonical_entries, total_order

PARAMS = SystemParams(n=64, f=21, q=4, t=3, k=2, delta_net=10, delta_clock=2)
LAG = 2 * 2 * 10 + 2


def cert(i, ts, path=0):
    tx = Transaction.synthetic(i, 0).id
    return Certificate.assemble(tx, path, 0, [HubApproval(0, ts, frozenset({1})),
                                              HubApproval(1, ts, frozenset({2}))])


def test_collect_verifies_and_dedups():
    cons = Consensus(PARAMS, 50, verifier=lambda c: c.locked_ts >= 0)
    assert cons.collect(cert(0, 5), 10)
    assert cons.collect(cert(0, 5), 12)  # same (tx, path) is ignored
    assert not cons.collect(cert(1, -1), 10)
    assert cons.rejected == 1 and cons.pending == 1
    cons.drain()
    assert len(cons.committed) == 1


def test_kappa_extremes_and_rate():
    certs = [cert(i, i) for i in range(10_000)]
    for kappa, expect in ((0.0, 10_000), (1.0, 0)):
        model = CensorshipModel(CensorshipMode.PROBABILISTIC_KAPPA, kappa,
                                rng=np.random.default_rng(0))
        cons = Consensus(PARAMS, 50, censorship=model)
        for c in certs:
            cons.collect(c, c.locked_ts)
        cons.drain()
        assert len(cons.committed) == expect
    model = CensorshipModel(CensorshipMode.PROBABILISTIC_KAPPA, 0.1, rng=np.random.default_rng(1))
    cons = Consensus(PARAMS, 50, censorship=model)
    for c in certs:
        cons.collect(c, c.locked_ts)
    cons.drain()
    rate = len(cons.committed) / len(certs)
    assert abs(rate - 0.9) <= 3 * (0.09 / len(certs)) ** 0.5


def test_late_placement():
    c = cert(0, 50)
    assert place_late_timestamp(c, None) == 50
    assert place_late_timestamp(c, 40) == 50
    assert place_late_timestamp(c, 100) == 100


def test_late_arrivals_clamp_and_tie_break():
    cons = Consensus(PARAMS, 100, lag=LAG)
    early = [cert(i, 10 + i) for i in range(3)]
    for c in early:
        cons.collect(c, 5)
    cons.drain()
    first_max = cons.chain[-1].max_ts
    late = [cert(10, 3), cert(11, 4)]
    for c in late:
        cons.collect(c, 400)
    cons.drain()
    got = [cons.committed[c.key] for c in late]
    assert {g.effective_ts for g in got} == {cons.chain[-1].min_ts}
    assert cons.chain[-1].min_ts > first_max
    assert all(g.raw_ts < g.effective_ts for g in got)
    ledger = total_order(canonical_entries(cons.committed_certs()).values())
    clamped = [e for e in ledger if e.tx in {c.tx for c in late}]
    assert [e.tx for e in clamped] == sorted(c.tx for c in late)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2000), st.integers(0, 60)), min_size=1, max_size=80),
       st.integers(1, 200))
def test_chain_append_only_and_prompt(rows, interval):
    cons = Consensus(PARAMS, interval, lag=LAG)
    certs = []
    for i, (ts, wait) in enumerate(rows):
        c = cert(i, ts)
        certs.append((c, ts + wait))
    for c, arrival in sorted(certs, key=lambda x: x[1]):
        cons.collect(c, arrival)
    snapshots = []
    while cons.pending:
        cons.form_block()
        snapshots.append(list(cons.chain))
    for earlier, later in zip(snapshots, snapshots[1:]):
        assert later[:len(earlier)] == earlier
    windows = [(b.min_ts, b.max_ts) for b in cons.chain]
    for (lo1, hi1), (lo2, hi2) in zip(windows, windows[1:]):
        assert lo2 == hi1 + 1
    for c, arrival in certs:
        got = cons.committed[c.key]
        # committed in the first block whose window can hold it
        assert got.block == cons.admit_block(c, arrival)
        assert got.effective_ts <= cons.chain[got.block - 1].max_ts
        if got.effective_ts != c.locked_ts:
            assert got.effective_ts == cons.chain[got.block - 1].min_ts


def test_leader_censor_only_removes():
    certs = [cert(i, 10 * i) for i in range(20)]
    targets = {certs[3].key, certs[7].key}
    cons = Consensus(PARAMS, 50, verifier=lambda c: c.locked_ts != 50,
                     censorship=CensorshipModel(CensorshipMode.LEADER_CENSOR, targets=targets))
    for c in certs:
        cons.collect(c, c.locked_ts)
    cons.drain()
    committed = set(cons.committed)
    assert committed == {c.key for c in certs} - targets - {certs[5].key}
    assert {c.key for c in cons.censored} == targets


def test_bad_interval_and_kappa():
    with pytest.raises(ValueError):
        Consensus(PARAMS, 0)
    with pytest.raises(ValueError):
        CensorshipModel(CensorshipMode.PROBABILISTIC_KAPPA, 0.5)
    with pytest.raises(ValueError):
        CensorshipModel(kappa=2.0)
