import numpy as np
import pytest

from pathfair.analysis import binomial_pass_prob, hypergeometric_pass_prob
from pathfair.assignment import (BlockRandomness, DecryptionSet, Topology, derive_path,
                                 enumerate_paths, hub_member, hub_members_reference,
                                 path_table, verify_membership)
from pathfair.core import SystemParams


def params(**kw):
    base = dict(n=64, f=0, q=4, t=3, k=2)
    base.update(kw)
    return SystemParams(**base)


def test_block_randomness_is_pinned():
    rand = BlockRandomness.derive(0, 0)
    assert rand.seed.hex() == "41c235ffc6221053702a44f263830c90e65e2ce14bb5fc894a997fc99c9233a6"
    spec = derive_path(1, rand, params())
    assert [h.members for h in spec.hubs] == [(0, 20, 25, 49), (6, 3, 63, 29)]


def test_single_node_network():
    rand = BlockRandomness.derive(3, 1)
    assert hub_member(0, 0, 0, rand, 1) == 0
    spec = derive_path(0, rand, SystemParams(n=1, f=0, q=1, t=1, k=1))
    assert len(spec.hubs) == 1 and spec.hubs[0].members == (0,)


def test_deterministic_and_distinct():
    rand = BlockRandomness.derive(11, 4)
    p = params(n=200, q=5, paths_per_block=200)
    a = enumerate_paths(rand, p)
    b = enumerate_paths(BlockRandomness.derive(11, 4), p)
    assert a == b
    assert len(a) == 200
    for spec in a:
        for hub in spec.hubs:
            assert len(set(hub.members)) == p.q
    hubs = [tuple(h.members for h in s.hubs) for s in a]
    assert len(set(hubs)) == len(hubs)
    assert enumerate_paths(rand, params(paths_per_block=0)) == []


def test_block_number_changes_membership():
    p = params(n=1000, q=8)
    seed = BlockRandomness.derive(5, 0).seed
    t0 = path_table(BlockRandomness(0, seed), p, range(50))
    t1 = path_table(BlockRandomness(1, seed), p, range(50))
    assert (t0 != t1).any(axis=(1, 2)).all()


def test_verify_membership_exhaustive():
    p = SystemParams(n=16, f=0, q=3, t=2, k=2)
    rand = BlockRandomness.derive(2, 9)
    for path_id in range(p.paths_per_block):
        for j in range(p.k):
            members = set(hub_members_reference(path_id, j, p.q, rand, p.n))
            for node in range(p.n):
                assert verify_membership(node, path_id, j, rand, p) == (node in members)
    assert not verify_membership(0, p.paths_per_block, 0, rand, p)
    assert not verify_membership(0, 0, p.k, rand, p)


def test_topology_cache_matches_reference():
    p = params()
    rand = BlockRandomness.derive(8, 2)
    top = Topology(rand, p)
    for path_id in (0, 17, 63):
        assert top.path(path_id) == derive_path(path_id, rand, p)
        assert top.is_member(top.path(path_id).hubs[1].members[2], path_id, 1)
    with pytest.raises(KeyError):
        top.path(64)


def test_membership_is_uniform():
    n, q = 16, 3
    p = SystemParams(n=n, f=0, q=q, t=2, k=1, paths_per_block=4000)
    counts = np.zeros(n)
    for b in range(3):
        table = path_table(BlockRandomness.derive(77, b), p)
        counts += np.bincount(table.ravel(), minlength=n)
    expected = counts.sum() / n
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < 37.7  # 99.9% point of chi-square with 15 degrees of freedom


def test_corrupted_hub_frequency_matches_binomial():
    n, q, t = 3000, 6, 4
    f = n // 3
    p = SystemParams(n=n, f=f, q=q, t=t, k=2, paths_per_block=50_000)
    table = path_table(BlockRandomness.derive(1, 1), p)
    corrupt = np.zeros(n, dtype=bool)
    corrupt[np.random.default_rng(0).choice(n, f, replace=False)] = True
    rate = float((corrupt[table].sum(axis=-1) >= t).mean())
    exact = hypergeometric_pass_prob(n, f, q, t)
    approx = binomial_pass_prob(q, t, f / n)
    sigma = (exact * (1 - exact) / table[..., 0].size) ** 0.5
    assert abs(rate - exact) <= 3 * sigma
    assert abs(rate - approx) <= 3 * sigma + abs(exact - approx)


def test_decryption_hubs_take_last_slot():
    dec = DecryptionSet(((60, 61, 62), (1, 2, 3)), (2, 2))
    p = params(k=3)
    rand = BlockRandomness.derive(4, 0)
    spec = derive_path(5, rand, p, dec)
    last = spec.hubs[-1]
    assert last.members in dec.hubs and last.threshold == 2
    assert verify_membership(last.members[0], 5, 2, rand, p, dec)
    with pytest.raises(ValueError):
        DecryptionSet(((1, 2),), (1,))
