"""Pure-numpy fallback: SHA-256 vectorised across many hub-member draws at once."""

import numpy as np

from ._common import H256, K256, MASK32, MAX_ATTEMPTS, MESSAGE_BITS, ZERO_SLOT_SALT

_K = K256.astype(np.uint32)
_H = H256.astype(np.uint32)


def _rotr(x, r):
    return (x >> np.uint32(r)) | (x << np.uint32(32 - r))


def _sha256_words(seed_w, block, path_ids, hubs, slots):
    """Digest words, shape (8, N), for N messages sharing one seed and block."""
    size = len(path_ids)
    w = np.empty((64, size), dtype=np.uint32)
    w[:8] = np.asarray(seed_w, dtype=np.uint64).astype(np.uint32)[:, None]
    b = np.asarray(block, dtype=np.uint64)
    w[8] = ((b >> np.uint64(32)) & np.uint64(MASK32)).astype(np.uint32)
    w[9] = (b & np.uint64(MASK32)).astype(np.uint32)
    w[10] = np.asarray(path_ids, dtype=np.uint64).astype(np.uint32)
    w[11] = np.asarray(hubs, dtype=np.uint64).astype(np.uint32)
    w[12] = np.asarray(slots, dtype=np.uint64).astype(np.uint32)
    w[13] = 0x80000000
    w[14] = 0
    w[15] = MESSAGE_BITS
    for i in range(16, 64):
        x, y = w[i - 15], w[i - 2]
        s0 = _rotr(x, 7) ^ _rotr(x, 18) ^ (x >> np.uint32(3))
        s1 = _rotr(y, 17) ^ _rotr(y, 19) ^ (y >> np.uint32(10))
        w[i] = w[i - 16] + s0 + w[i - 7] + s1
    a, b_, c, d, e, f, g, h = (np.full(size, v, dtype=np.uint32) for v in _H)
    for i in range(64):
        s1 = _rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)
        ch = (e & f) ^ (~e & g)
        t1 = h + s1 + ch + _K[i] + w[i]
        s0 = _rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)
        maj = (a & b_) ^ (a & c) ^ (b_ & c)
        t2 = s0 + maj
        h, g, f, e, d, c, b_, a = g, f, e, d + t1, c, b_, a, t1 + t2
    return np.stack([_H[0] + a, _H[1] + b_, _H[2] + c, _H[3] + d,
                     _H[4] + e, _H[5] + f, _H[6] + g, _H[7] + h])


def _reduce_mod(words, n):
    acc = np.zeros(words.shape[1], dtype=np.uint64)
    nn = np.uint64(n)
    for v in words:
        acc = ((acc << np.uint64(32)) | v.astype(np.uint64)) % nn
    return acc.astype(np.int64)


def digest_mod(seed_w, block, path_id, hub, slot, n):
    words = _sha256_words(seed_w, block, np.array([path_id]), np.array([hub]),
                          np.array([slot]))
    return int(_reduce_mod(words, n)[0])


def _slots(member, attempts):
    attempts = np.asarray(attempts, dtype=np.int64)
    base = member if member > 0 else ZERO_SLOT_SALT
    return np.where(attempts == 0, member, ((attempts + 1) * base) & MASK32)


def path_table(seed_w, block, n, q, k, path_ids):
    path_ids = np.asarray(path_ids, dtype=np.int64)
    hub_path = np.repeat(path_ids, k)
    hub_idx = np.tile(np.arange(k, dtype=np.int64), len(path_ids))
    members = np.full((len(hub_path), q), -1, dtype=np.int64)
    for m in range(q):
        pending = np.arange(len(hub_path))
        attempts = np.zeros(len(hub_path), dtype=np.int64)
        while pending.size:
            words = _sha256_words(seed_w, block, hub_path[pending], hub_idx[pending],
                                  _slots(m, attempts[pending]))
            cand = _reduce_mod(words, n)
            dup = (members[pending, :m] == cand[:, None]).any(axis=1)
            ok = pending[~dup]
            members[ok, m] = cand[~dup]
            pending = pending[dup]
            attempts[pending] += 1
            if pending.size and attempts[pending].max() >= MAX_ATTEMPTS:
                raise RuntimeError("hub member derivation did not terminate")
    return members.reshape(len(path_ids), k, q)


def _classes(table, corrupt, t):
    bad = corrupt[table].sum(axis=-1)
    good = table.shape[-1] - bad
    cls = np.ones(bad.shape, dtype=np.int64)
    cls[(good >= t) & (bad < t)] = 0
    cls[(bad >= t) & (good < t)] = 3
    cls[(bad >= t) & (good >= t)] = 2
    return cls


def any_corrupted_path(seed_ws, blocks, corrupt, n, q, t, k, paths):
    out = np.zeros(len(seed_ws), dtype=bool)
    ids = np.arange(paths, dtype=np.int64)
    for i in range(len(seed_ws)):
        table = path_table(seed_ws[i], blocks[i], n, q, k, ids)
        cls = _classes(table, corrupt[i].astype(bool), t)
        out[i] = bool((cls == 3).all(axis=1).any()) if paths else False
    return out


def any_regular_choice(seed_ws, blocks, corrupt, choices, n, q, t, k):
    out = np.zeros(len(seed_ws), dtype=bool)
    for i in range(len(seed_ws)):
        if choices.shape[1] == 0:
            continue
        table = path_table(seed_ws[i], blocks[i], n, q, k, choices[i])
        cls = _classes(table, corrupt[i].astype(bool), t)
        out[i] = bool((cls == 0).all(axis=1).any())
    return out
