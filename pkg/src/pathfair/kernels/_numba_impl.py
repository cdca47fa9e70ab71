"""numba kernels for hub assignment and corruption Monte Carlo."""

import numpy as np
from numba import njit

from ._common import H256, K256, MASK32, MAX_ATTEMPTS, MESSAGE_BITS, ZERO_SLOT_SALT

_K = K256.astype(np.uint32)
_H = H256.astype(np.uint32)


@njit(cache=True, nogil=True, inline="always")
def _rotr(x, r):
    return np.uint32((x >> r) | (x << (32 - r)))


@njit(cache=True, nogil=True, inline="always")
def _fold(acc, word, nn):
    return ((acc << np.uint64(32)) | np.uint64(word)) % nn


@njit(cache=True, nogil=True)
def _digest_mod(seed_w, block, path_id, hub, slot, n, w):
    # explicit uint32 casts keep numba from widening to uint64
    for i in range(8):
        w[i] = np.uint32(seed_w[i])
    w[8] = np.uint32(np.uint64(block) >> np.uint64(32))
    w[9] = np.uint32(np.uint64(block) & np.uint64(MASK32))
    w[10] = np.uint32(path_id)
    w[11] = np.uint32(hub)
    w[12] = np.uint32(slot)
    w[13] = np.uint32(0x80000000)
    w[14] = np.uint32(0)
    w[15] = np.uint32(MESSAGE_BITS)
    for i in range(16, 64):
        x = w[i - 15]
        y = w[i - 2]
        s0 = _rotr(x, 7) ^ _rotr(x, 18) ^ (x >> 3)
        s1 = _rotr(y, 17) ^ _rotr(y, 19) ^ (y >> 10)
        w[i] = np.uint32(w[i - 16] + s0 + w[i - 7] + s1)
    a = _H[0]
    b = _H[1]
    c = _H[2]
    d = _H[3]
    e = _H[4]
    f = _H[5]
    g = _H[6]
    h = _H[7]
    for i in range(64):
        S1 = _rotr(e, 6) ^ _rotr(e, 11) ^ _rotr(e, 25)
        ch = np.uint32((e & f) ^ (~e & g))
        t1 = np.uint32(h + S1 + ch + _K[i] + w[i])
        S0 = _rotr(a, 2) ^ _rotr(a, 13) ^ _rotr(a, 22)
        maj = np.uint32((a & b) ^ (a & c) ^ (b & c))
        t2 = np.uint32(S0 + maj)
        h = g
        g = f
        f = e
        e = np.uint32(d + t1)
        d = c
        c = b
        b = a
        a = np.uint32(t1 + t2)
    nn = np.uint64(n)
    acc = _fold(np.uint64(0), np.uint32(_H[0] + a), nn)
    acc = _fold(acc, np.uint32(_H[1] + b), nn)
    acc = _fold(acc, np.uint32(_H[2] + c), nn)
    acc = _fold(acc, np.uint32(_H[3] + d), nn)
    acc = _fold(acc, np.uint32(_H[4] + e), nn)
    acc = _fold(acc, np.uint32(_H[5] + f), nn)
    acc = _fold(acc, np.uint32(_H[6] + g), nn)
    acc = _fold(acc, np.uint32(_H[7] + h), nn)
    return np.int64(acc)


@njit(cache=True, nogil=True)
def _slot(member, attempt):
    if attempt == 0:
        return np.int64(member)
    base = np.int64(member) if member > 0 else np.int64(ZERO_SLOT_SALT)
    return ((attempt + 1) * base) & np.int64(MASK32)


@njit(cache=True, nogil=True)
def _fill_hub(seed_w, block, path_id, hub, n, q, out, w):
    for m in range(q):
        attempt = 0
        while True:
            node = _digest_mod(seed_w, block, path_id, hub, _slot(m, attempt), n, w)
            dup = False
            for prev in range(m):
                if out[prev] == node:
                    dup = True
                    break
            if not dup:
                out[m] = node
                break
            attempt += 1
            if attempt >= MAX_ATTEMPTS:
                out[m] = -1
                return False
    return True


@njit(cache=True, nogil=True)
def digest_mod(seed_w, block, path_id, hub, slot, n):
    w = np.empty(64, np.uint32)
    return _digest_mod(seed_w, block, path_id, hub, slot, n, w)


@njit(cache=True, nogil=True)
def path_table(seed_w, block, n, q, k, path_ids):
    out = np.empty((path_ids.shape[0], k, q), np.int64)
    w = np.empty(64, np.uint32)
    for i in range(path_ids.shape[0]):
        for j in range(k):
            if not _fill_hub(seed_w, block, path_ids[i], j, n, q, out[i, j], w):
                raise RuntimeError("hub member derivation did not terminate")
    return out


@njit(cache=True, nogil=True)
def _hub_class(seed_w, block, path_id, hub, n, q, t, corrupt, members, w):
    # 0 regular, 1 impasse, 2 both, 3 corrupted
    _fill_hub(seed_w, block, path_id, hub, n, q, members, w)
    bad = 0
    for m in range(q):
        if corrupt[members[m]]:
            bad += 1
    good = q - bad
    if good >= t and bad >= t:
        return 2
    if good >= t:
        return 0
    if bad >= t:
        return 3
    return 1


@njit(cache=True, nogil=True)
def any_corrupted_path(seed_ws, blocks, corrupt, n, q, t, k, paths):
    trials = seed_ws.shape[0]
    out = np.zeros(trials, np.bool_)
    w = np.empty(64, np.uint32)
    members = np.empty(q, np.int64)
    for i in range(trials):
        for p in range(paths):
            all_bad = True
            for j in range(k):
                if _hub_class(seed_ws[i], blocks[i], p, j, n, q, t, corrupt[i], members, w) != 3:
                    all_bad = False
                    break
            if all_bad:
                out[i] = True
                break
    return out


@njit(cache=True, nogil=True)
def any_regular_choice(seed_ws, blocks, corrupt, choices, n, q, t, k):
    trials = seed_ws.shape[0]
    out = np.zeros(trials, np.bool_)
    w = np.empty(64, np.uint32)
    members = np.empty(q, np.int64)
    for i in range(trials):
        for c in range(choices.shape[1]):
            all_good = True
            for j in range(k):
                if _hub_class(seed_ws[i], blocks[i], choices[i, c], j, n, q, t, corrupt[i],
                              members, w) != 0:
                    all_good = False
                    break
            if all_good:
                out[i] = True
                break
    return out
