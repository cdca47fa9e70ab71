"""Hub and path assignment from per-block public randomness.

Member slot m of hub j on path p in block b is the node
``SHA256(r | b | p | j | m) mod n``. If that node already sits in the hub the
slot field is replaced by 2m, 3m, ... until a fresh node appears (slot 0 uses a
fixed salt as its multiplier base). Every observer holding (b, r) recomputes
the same table. Hubs on the same path are drawn independently and may share
members.

``hub_member`` and ``hub_members_reference`` go through :mod:`hashlib`
directly; the table builders go through :mod:`pathfair.kernels`.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .core import HubSpec, NodeId, PathSpec, SystemParams
from .kernels._common import MASK32, MAX_ATTEMPTS

_ENCODING = struct.Struct(">32sQIII")
# Slot tag reserved for picking a decryption hub for a path's last position.
DECRYPTION_SLOT = MASK32


@dataclass(frozen=True)
class BlockRandomness:
    block: int
    seed: bytes

    def __post_init__(self):
        if len(self.seed) != 32:
            raise ValueError("block randomness must be 32 bytes")
        if not 0 <= self.block < 2**63:
            raise ValueError("block number must fit in a signed 64-bit integer")

    @classmethod
    def derive(cls, root_seed: int, block: int) -> "BlockRandomness":
        """Deterministic stand-in for a beacon output, keyed by the run seed."""
        h = hashlib.sha256(b"pathfair/block-randomness")
        h.update(int(root_seed).to_bytes(16, "big", signed=True))
        h.update(int(block).to_bytes(8, "big"))
        return cls(block, h.digest())

    @cached_property
    def words(self) -> np.ndarray:
        return kernels.seed_words(self.seed)


def encode_draw(rand: BlockRandomness, path_id: int, hub_index: int, slot: int) -> bytes:
    return _ENCODING.pack(rand.seed, rand.block, path_id, hub_index, slot)


def draw_node(rand: BlockRandomness, path_id: int, hub_index: int, slot: int, n: int) -> NodeId:
    digest = hashlib.sha256(encode_draw(rand, path_id, hub_index, slot)).digest()
    return int.from_bytes(digest, "big") % n


def hub_members_reference(path_id: int, hub_index: int, q: int, rand: BlockRandomness,
                          n: int) -> tuple[NodeId, ...]:
    if q > n:
        raise ValueError("hub size cannot exceed n")
    chosen: list[NodeId] = []
    for m in range(q):
        for attempt in range(MAX_ATTEMPTS):
            node = draw_node(rand, path_id, hub_index, kernels.slot_value(m, attempt), n)
            if node not in chosen:
                chosen.append(node)
                break
        else:
            raise RuntimeError("hub member derivation did not terminate")
    return tuple(chosen)


def hub_member(path_id: int, hub_index: int, member_index: int, rand: BlockRandomness,
               n: int) -> NodeId:
    """Node in slot ``member_index`` of the hub, resolving collisions with earlier slots."""
    return hub_members_reference(path_id, hub_index, member_index + 1, rand, n)[member_index]


@dataclass(frozen=True)
class DecryptionSet:
    """Small hubs able to reveal encrypted payloads; one is forced into each path's last slot."""

    hubs: tuple[tuple[NodeId, ...], ...]
    thresholds: tuple[int, ...]

    def __post_init__(self):
        if not self.hubs or len(self.hubs) != len(self.thresholds):
            raise ValueError("decryption set needs one threshold per hub")
        for members, thr in zip(self.hubs, self.thresholds):
            if len(set(members)) != len(members) or not 2 * thr > len(members) >= thr:
                raise ValueError("decryption hubs need distinct members and t > size/2")

    def pick(self, rand: BlockRandomness, path_id: int, hub_index: int, n: int) -> int:
        digest = hashlib.sha256(encode_draw(rand, path_id, hub_index, DECRYPTION_SLOT)).digest()
        return int.from_bytes(digest, "big") % len(self.hubs)


def path_table(rand: BlockRandomness, params: SystemParams,
               path_ids: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
    """Member table of shape (len(path_ids), k, q); all admissible paths by default."""
    if path_ids is None:
        path_ids = np.arange(params.paths_per_block, dtype=np.int64)
    ids = np.asarray(path_ids, dtype=np.int64)
    if ids.size == 0:
        return np.empty((0, params.k, params.q), dtype=np.int64)
    return kernels.path_table(rand.words, rand.block, params.n, params.q, params.k, ids)


def _spec_from_rows(path_id: int, rows: np.ndarray, rand: BlockRandomness, params: SystemParams,
                    decryption: DecryptionSet | None) -> PathSpec:
    hubs = [HubSpec(tuple(int(x) for x in row), j) for j, row in enumerate(rows)]
    if decryption is not None:
        last = params.k - 1
        idx = decryption.pick(rand, path_id, last, params.n)
        hubs[last] = HubSpec(tuple(decryption.hubs[idx]), last, decryption.thresholds[idx])
    return PathSpec(path_id, tuple(hubs), rand.block)


def _check_path_id(path_id: int, params: SystemParams) -> None:
    if not 0 <= path_id < params.paths_per_block:
        raise KeyError(f"path {path_id} outside [0, {params.paths_per_block})")


def derive_path(path_id: int, rand: BlockRandomness, params: SystemParams,
                decryption: DecryptionSet | None = None) -> PathSpec:
    _check_path_id(path_id, params)
    rows = path_table(rand, params, [path_id])[0]
    return _spec_from_rows(path_id, rows, rand, params, decryption)


def enumerate_paths(rand: BlockRandomness, params: SystemParams,
                    decryption: DecryptionSet | None = None) -> list[PathSpec]:
    table = path_table(rand, params)
    return [_spec_from_rows(p, table[p], rand, params, decryption) for p in range(len(table))]


def verify_membership(node: NodeId, path_id: int, hub_index: int, rand: BlockRandomness,
                      params: SystemParams, decryption: DecryptionSet | None = None) -> bool:
    if not 0 <= path_id < params.paths_per_block or not 0 <= hub_index < params.k:
        return False
    if decryption is not None and hub_index == params.k - 1:
        idx = decryption.pick(rand, path_id, hub_index, params.n)
        return node in decryption.hubs[idx]
    members = hub_members_reference(path_id, hub_index, params.q, rand, params.n)
    return node in members


class Topology:
    """Cached path table for one block, shared by routing and certificate checks."""

    def __init__(self, rand: BlockRandomness, params: SystemParams,
                 decryption: DecryptionSet | None = None):
        self.rand = rand
        self.params = params
        self.decryption = decryption
        self.table = path_table(rand, params)
        self._specs: dict[int, PathSpec] = {}
        self._member_sets: dict[tuple[int, int], frozenset[NodeId]] = {}

    @property
    def block(self) -> int:
        return self.rand.block

    def path(self, path_id: int) -> PathSpec:
        spec = self._specs.get(path_id)
        if spec is None:
            _check_path_id(path_id, self.params)
            spec = _spec_from_rows(path_id, self.table[path_id], self.rand, self.params,
                                   self.decryption)
            self._specs[path_id] = spec
        return spec

    def paths(self) -> list[PathSpec]:
        return [self.path(p) for p in range(self.params.paths_per_block)]

    def members(self, path_id: int, hub_index: int) -> frozenset[NodeId]:
        key = (path_id, hub_index)
        got = self._member_sets.get(key)
        if got is None:
            got = frozenset(self.path(path_id).hubs[hub_index].members)
            self._member_sets[key] = got
        return got

    def is_member(self, node: NodeId, path_id: int, hub_index: int) -> bool:
        if not 0 <= path_id < self.params.paths_per_block or not 0 <= hub_index < self.params.k:
            return False
        return node in self.members(path_id, hub_index)
