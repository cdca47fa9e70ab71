"""Path traversal: hub approval, iterative and recursive routing, reveal tracking.

Each traversal is a small state machine driven by simulator events. The delay
of every message a traversal could send is drawn when the transaction is
submitted, in a fixed layout, so replaying the traversal with the adversary
switched off sees exactly the same network.

Counting rules (q_j is the size of hub j, L the payload, lam the hash size):

iterative
    client -> initiator: 1 message of L bytes
    per hub: q_j requests of lam bytes (the ciphertext, L bytes, when the hub
    decrypts a hidden payload) and q_j signatures of lam bytes back
    delivery: 1 message of L + k*lam bytes
recursive
    client -> initiator: 1 message of L bytes
    initiator -> hub 0: q_0 messages of L bytes
    hub j -> hub j+1: q_j * q_{j+1} messages of L + (j+1)*lam bytes
    delivery: q_{k-1} messages of L + k*lam bytes

Submission bytes exclude the delivery leg.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .assignment import BlockRandomness, DecryptionSet, Topology, verify_membership
from .core import (Certificate, HubApproval, NodeId, PathSpec, SystemParams, Transaction,
                   locked_timestamp_of)
from .simnet import CLIENT, CONSENSUS, NetModel, Simulator

INF = math.inf


class TraversalMode(enum.Enum):
    ITERATIVE = "iterative"
    RECURSIVE = "recursive"


class StampRule(enum.Enum):
    """Which reading stamps a hub approval, taken over the first t signatures to arrive."""

    THRESHOLD = "threshold"  # the t-th arrival
    MAX = "max"
    MEDIAN = "median"  # lower median

    def pick(self, readings: Sequence[int]) -> int:
        if self is StampRule.THRESHOLD:
            return readings[-1]
        if self is StampRule.MAX:
            return max(readings)
        return sorted(readings)[(len(readings) - 1) // 2]


@dataclass(frozen=True)
class Deviation:
    """How the adversary departs from the protocol on one path.

    ``delay_hub`` with ``delay_amount=None`` withholds forever (a stall).
    ``chain`` is an inclusive hub range that gets signed at a single reading.
    """

    delay_hub: int | None = None
    delay_amount: int | None = None
    reuse_from: int | None = None
    chain: tuple[int, int] | None = None
    forge: bool = False
    forge_ts: int = 0

    @property
    def active(self) -> bool:
        return (self.delay_hub is not None or self.reuse_from is not None
                or self.chain is not None or self.forge)


HONEST = Deviation()


@dataclass(frozen=True)
class RevealPolicy:
    decrypt_hub_indices: frozenset[int]
    layered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "decrypt_hub_indices", frozenset(self.decrypt_hub_indices))
        if not self.decrypt_hub_indices:
            raise ValueError("reveal policy needs at least one decryption hub")

    @classmethod
    def last_hub(cls, k: int) -> "RevealPolicy":
        return cls(frozenset({k - 1}))


@dataclass(frozen=True)
class RevealRecord:
    tx: bytes
    path: int
    adversary_knowledge_time: float
    reveal_time: float


# ---------------------------------------------------------------- counting rules

def delay_slots(sizes: Sequence[int], mode: TraversalMode) -> int:
    k = len(sizes)
    if mode is TraversalMode.ITERATIVE:
        return 2 + 2 * sum(sizes)
    return 1 + sizes[0] + sum(sizes[j] * sizes[j + 1] for j in range(k - 1)) + sizes[-1]


def submission_messages(sizes: Sequence[int], mode: TraversalMode) -> int:
    if mode is TraversalMode.ITERATIVE:
        return 1 + 2 * sum(sizes)
    return 1 + sizes[0] + sum(sizes[j] * sizes[j + 1] for j in range(len(sizes) - 1))


def submission_bytes(sizes: Sequence[int], mode: TraversalMode, payload: int, lam: int,
                     reveal_hubs: Iterable[int] = ()) -> int:
    """Bytes a single honest path puts on the wire before delivery."""
    k = len(sizes)
    if mode is TraversalMode.ITERATIVE:
        cipher = set(reveal_hubs)
        out = sum(q * (payload if j in cipher else lam) for j, q in enumerate(sizes))
        return payload + out + lam * sum(sizes)
    hops = sum(sizes[j] * sizes[j + 1] * (payload + (j + 1) * lam) for j in range(k - 1))
    return payload + sizes[0] * payload + hops


def delivery_messages(sizes: Sequence[int], mode: TraversalMode) -> int:
    return 1 if mode is TraversalMode.ITERATIVE else sizes[-1]


def delivery_bytes(sizes: Sequence[int], mode: TraversalMode, payload: int, lam: int) -> int:
    return delivery_messages(sizes, mode) * (payload + len(sizes) * lam)


# ---------------------------------------------------------------- certificates

def verify_certificate(cert: Certificate, rand: BlockRandomness, params: SystemParams,
                       decryption: DecryptionSet | None = None,
                       topology: Topology | None = None) -> bool:
    """Structural and membership check; signer ids are recomputed from (b, r)."""
    if cert.block != rand.block or len(cert.approvals) != params.k:
        return False
    if not 0 <= cert.path < params.paths_per_block:
        return False
    for j, appr in enumerate(cert.approvals):
        if appr.hub_index != j:
            return False
        ts = appr.timestamp
        if isinstance(ts, bool) or not isinstance(ts, (int, np.integer)):
            return False
        if topology is not None:
            spec = topology.path(cert.path).hubs[j]
            members = topology.members(cert.path, j)
            if any(s not in members for s in appr.signers):
                return False
        else:
            spec = None
            if any(not verify_membership(s, cert.path, j, rand, params, decryption)
                   for s in appr.signers):
                return False
        if decryption is not None and j == params.k - 1:
            idx = decryption.pick(rand, cert.path, j, params.n)
            need = decryption.thresholds[idx]
        else:
            need = params.t if spec is None else spec.threshold_for(params)
        if len(appr.signers) < need:
            return False
    return cert.locked_ts == locked_timestamp_of(cert.approvals)


# ---------------------------------------------------------------- traversals

class Traversal:
    """One transaction copy walking one path."""

    def __init__(self, router: "Router", tx: Transaction, path: PathSpec, delays: list[int],
                 deviation: Deviation):
        self.router = router
        self.sim = router.sim
        self.tx = tx
        self.path = path
        self.delays = delays
        self.deviation = deviation
        params = router.params
        self.k = len(path.hubs)
        self.members = [h.members for h in path.hubs]
        self.initiator = path.hubs[0].members[0]
        self._init_bad = self.initiator in router.corrupted
        self.sizes = [len(m) for m in self.members]
        self.thresholds = [h.threshold_for(params) for h in path.hubs]
        bad = router.corrupted
        self.bad = [[m for m in hub if m in bad] for hub in self.members]
        self.lam = params.lambda_bytes
        self.reveal_hubs = router.reveal_hubs(self) if tx.hidden else frozenset()

        self.start: int | None = None
        self.approvals: list[HubApproval] = []
        self.hub_done: list[float] = [INF] * self.k
        self.certificate: Certificate | None = None
        self.approved_at: int | None = None
        self.delivered_at: int | None = None
        self.messages = 0
        self.bytes = 0
        self.delivery_messages = 0
        self.delivery_bytes = 0
        # receipt times per hub, for the threshold-decryption reveal instant
        self.receipts: list[list[int]] = [[] for _ in range(self.k)]
        # corrupted contacts: (time, hub, holds_ciphertext, role)
        self.contacts: list[tuple[int, int, bool, str]] = []
        self.adversary_sent = [False] * self.k
        self.chain_ts: int | None = None

    # -- bookkeeping
    def _count(self, n_bytes: int) -> None:
        self.messages += 1
        self.bytes += n_bytes

    def _contact(self, node: NodeId, hub: int, cipher: bool, role: str) -> None:
        if node in self.router.corrupted:
            self.contacts.append((self.sim.now, hub, cipher, role))

    @property
    def completed(self) -> bool:
        return self.certificate is not None

    @property
    def stalled_at(self) -> int | None:
        if self.certificate is not None:
            return None
        return len(self.approvals)

    def launch(self) -> None:
        self._count(self.tx.payload_len)
        self.sim.send(CLIENT, self.initiator, self.delays[0], self._at_initiator)

    def _at_initiator(self) -> None:
        self.start = self.sim.now
        self._contact(self.initiator, 0, True, "initiator")
        dev = self.deviation
        if dev.forge and self.initiator in self.router.corrupted:
            self._forge(self.initiator)
            return
        self._begin()

    def _begin(self) -> None:
        raise NotImplementedError

    def _adversary_approvals(self, hubs: Iterable[int], ts: int) -> list[HubApproval]:
        return [HubApproval(j, ts, frozenset(self.bad[j][:self.thresholds[j]])) for j in hubs]

    def _forge(self, node: NodeId) -> None:
        if self.certificate is not None or self.adversary_sent[0]:
            return
        self.adversary_sent[0] = True
        approvals = self._adversary_approvals(range(self.k), self.deviation.forge_ts)
        self.approved_at = self.sim.now
        self.sim.send(node, CONSENSUS, 0, self._deliver, approvals)

    def _deliver(self, approvals: Sequence[HubApproval]) -> None:
        if self.certificate is not None:
            return
        self.certificate = Certificate.assemble(self.tx.id, self.path.path_id, self.path.block,
                                                approvals)
        self.delivered_at = self.sim.now
        self.router._delivered(self)

    def honest_counts_match(self) -> bool:
        """Whether measured traffic equals the closed-form counting rule."""
        mode = self.router.mode
        return (self.messages == submission_messages(self.sizes, mode)
                and self.bytes == submission_bytes(self.sizes, mode, self.tx.payload_len,
                                                   self.lam, self.reveal_hubs)
                and self.delivery_messages == delivery_messages(self.sizes, mode)
                and self.delivery_bytes == delivery_bytes(self.sizes, mode,
                                                          self.tx.payload_len, self.lam))


class IterativeTraversal(Traversal):
    """The initiator polls each hub in turn with the digest."""

    def __init__(self, *args):
        super().__init__(*args)
        offs = [1]
        for q in self.sizes:
            offs.append(offs[-1] + 2 * q)
        self._offs = offs
        self._current = -1
        self._inbox: dict[NodeId, int] = {}
        self._requested_at = [INF] * self.k

    def _begin(self) -> None:
        self._request(0)

    def _request(self, j: int) -> None:
        self._current = j
        self._inbox = {}
        self._requested_at[j] = self.sim.now
        size = self.tx.payload_len if j in self.reveal_hubs else self.lam
        base = self._offs[j]
        init = self.initiator
        send = self.sim.send
        delays = self.delays
        members = self.members[j]
        self.messages += len(members)
        self.bytes += size * len(members)
        for m, node in enumerate(members):
            send(init, node, delays[base + m], self._at_member, j, m)

    def _at_member(self, j: int, m: int) -> None:
        node = self.members[j][m]
        sim = self.sim
        self.receipts[j].append(sim.now)
        corrupt = node in self.router.corrupted
        if not corrupt:
            self._sign(j, m)
            return
        self.contacts.append((sim.now, j, j in self.reveal_hubs, "member"))
        dev = self.deviation
        if dev.forge:
            self._forge(node)
            return
        if dev.reuse_from is not None and j >= dev.reuse_from:
            self._adversary_reply(node, j, self.approvals[dev.reuse_from - 1].timestamp)
            return
        if dev.chain is not None and dev.chain[0] <= j <= dev.chain[1]:
            if self.chain_ts is None:
                self.chain_ts = sim.read_clock(node)
            self._adversary_reply(node, j, self.chain_ts)
            return
        if dev.delay_hub == j:
            if dev.delay_amount is not None:
                sim.schedule(sim.now + dev.delay_amount, self._sign, j, m)
            return
        if self.router.cooperate:
            self._sign(j, m)

    def _sign(self, j: int, m: int) -> None:
        node = self.members[j][m]
        sim = self.sim
        self.messages += 1
        self.bytes += self.lam
        sim.send(node, self.initiator, self.delays[self._offs[j] + self.sizes[j] + m],
                 self._reply, j, node, sim.now + sim.clock.offsets[node])

    def _adversary_reply(self, node: NodeId, j: int, ts: int) -> None:
        if self.adversary_sent[j]:
            return
        self.adversary_sent[j] = True
        for signer in self.bad[j][:self.thresholds[j]]:
            self._count(self.lam)
            self.sim.send(node, self.initiator, 0, self._reply, j, signer, ts)

    def _reply(self, j: int, signer: NodeId, ts: int) -> None:
        if self._init_bad:
            self.contacts.append((self.sim.now, j, j in self.reveal_hubs, "initiator"))
        if j != self._current or len(self.approvals) > j:
            return
        inbox = self._inbox
        if signer in inbox:
            return
        inbox[signer] = ts
        if len(inbox) < self.thresholds[j]:
            return
        stamp = self.router.stamp.pick(list(inbox.values()))
        self.approvals.append(HubApproval(j, stamp, frozenset(inbox)))
        self.hub_done[j] = self.sim.now
        if j + 1 < self.k:
            self._request(j + 1)
            return
        self.approved_at = self.sim.now
        self.delivery_messages += 1
        self.delivery_bytes += self.tx.payload_len + self.k * self.lam
        self.sim.send(self.initiator, CONSENSUS, self.delays[self._offs[-1]],
                      self._deliver, tuple(self.approvals))


class RecursiveTraversal(Traversal):
    """Hub members forward signatures straight to the members of the next hub."""

    def __init__(self, *args):
        super().__init__(*args)
        offs = [1, 1 + self.sizes[0]]
        for j in range(self.k - 1):
            offs.append(offs[-1] + self.sizes[j] * self.sizes[j + 1])
        self._offs = offs  # offs[j+1] is the first slot of hop j -> j+1; offs[k] the delivery
        # per hub, per member: signatures received from the previous hub
        self._inbox: list[list[list[tuple[NodeId, int]]]] = [
            [[] for _ in range(q)] for q in self.sizes]
        self._ready = [[False] * q for q in self.sizes]
        self._final: list[tuple[NodeId, int]] = []
        self._signed_last = 0

    def _begin(self) -> None:
        init = self.initiator
        base = self._offs[0]
        for m, node in enumerate(self.members[0]):
            self._count(self.tx.payload_len)
            self.sim.send(init, node, self.delays[base + m], self._at_member, 0, m, ())

    def _at_member(self, j: int, m: int, prefix: tuple[HubApproval, ...]) -> None:
        """Member m of hub j holds the payload and a verified prefix for hubs < j."""
        if self._ready[j][m]:
            return
        self._ready[j][m] = True
        node = self.members[j][m]
        sim = self.sim
        self.receipts[j].append(sim.now)
        if node not in self.router.corrupted:
            self._sign(j, m, prefix)
            return
        self.contacts.append((sim.now, j, True, "member"))
        dev = self.deviation
        if dev.forge:
            self._forge(node)
            return
        if dev.reuse_from is not None and j >= dev.reuse_from:
            if not self.adversary_sent[j]:
                self.adversary_sent[j] = True
                ts = prefix[dev.reuse_from - 1].timestamp
                tail = self._adversary_approvals(range(j, self.k), ts)
                self.approved_at = sim.now
                sim.send(node, CONSENSUS, 0, self._deliver, prefix + tuple(tail))
            return
        if dev.chain is not None and dev.chain[0] <= j <= dev.chain[1]:
            if not self.adversary_sent[j]:
                self.adversary_sent[j] = True
                self._run_chain(node, j, prefix)
            return
        if dev.delay_hub == j:
            if dev.delay_amount is not None:
                sim.schedule(sim.now + dev.delay_amount, self._sign, j, m, prefix)
            return
        if self.router.cooperate:
            self._sign(j, m, prefix)

    def _run_chain(self, node: NodeId, j: int, prefix: tuple[HubApproval, ...]) -> None:
        first, last = self.deviation.chain
        ts = self.sim.read_clock(node)
        approvals = self._adversary_approvals(range(j, last + 1), ts)
        chain = prefix + tuple(approvals[:-1])
        signers = sorted(approvals[-1].signers, key=self.members[last].index)
        sim = self.sim
        if last == self.k - 1:
            self.approved_at = sim.now
            sim.send(node, CONSENSUS, 0, self._deliver, prefix + tuple(approvals))
            return
        size = self.tx.payload_len + (last + 1) * self.lam
        for r in range(self.sizes[last + 1]):
            for signer in signers:
                self._count(size)
                sim.send(node, self.members[last + 1][r], 0, self._sig, last + 1, r, signer,
                         ts, chain)

    def _sign(self, j: int, m: int, prefix: tuple[HubApproval, ...]) -> None:
        node = self.members[j][m]
        sim = self.sim
        ts = sim.read_clock(node)
        if j == self.k - 1:
            self._signed_last += 1
            if self._signed_last == self.thresholds[j] and self.approved_at is None:
                self.approved_at = sim.now
            base = self._offs[self.k]
            self.delivery_messages += 1
            self.delivery_bytes += self.tx.payload_len + self.k * self.lam
            sim.send(node, CONSENSUS, self.delays[base + m], self._final_sig, node, ts, prefix)
            return
        base = self._offs[j + 1] + m * self.sizes[j + 1]
        size = self.tx.payload_len + (j + 1) * self.lam
        for r, dst in enumerate(self.members[j + 1]):
            self._count(size)
            sim.send(node, dst, self.delays[base + r], self._sig, j + 1, r, node, ts, prefix)

    def _sig(self, j: int, r: int, signer: NodeId, ts: int,
             prefix: tuple[HubApproval, ...]) -> None:
        """Member r of hub j receives one signature of hub j-1."""
        self._contact(self.members[j][r], j, True, "member")
        if self._ready[j][r]:
            return
        inbox = self._inbox[j][r]
        if any(s == signer for s, _ in inbox):
            return
        inbox.append((signer, ts))
        if len(inbox) < self.thresholds[j - 1]:
            return
        stamp = self.router.stamp.pick([r for _, r in inbox])
        approval = HubApproval(j - 1, stamp, frozenset(s for s, _ in inbox))
        if len(self.approvals) < j:
            self.approvals.append(approval)
            self.hub_done[j - 1] = self.sim.now
        self._at_member(j, r, prefix + (approval,))

    def _final_sig(self, signer: NodeId, ts: int, prefix: tuple[HubApproval, ...]) -> None:
        if self.certificate is not None:
            return
        inbox = self._final
        inbox.append((signer, ts))
        last = self.k - 1
        if len(inbox) < self.thresholds[last]:
            return
        stamp = self.router.stamp.pick([r for _, r in inbox])
        approval = HubApproval(last, stamp, frozenset(s for s, _ in inbox))
        self.hub_done[last] = self.sim.now
        self._deliver(prefix + (approval,))


# ---------------------------------------------------------------- router

class Router:
    """Starts traversals on a simulator and hands finished certificates on."""

    def __init__(self, sim: Simulator, params: SystemParams, mode: TraversalMode,
                 delay_rng: np.random.Generator, *, cooperate: bool = True,
                 stamp: StampRule = StampRule.THRESHOLD,
                 reveal_policy: RevealPolicy | None = None,
                 on_deliver: Callable[[Traversal], None] | None = None):
        self.sim = sim
        self.params = params
        self.mode = mode
        self.delay_rng = delay_rng
        self.corrupted = sim.corrupted
        self.cooperate = cooperate
        self.stamp = stamp
        self.reveal_policy = reveal_policy
        self.on_deliver = on_deliver
        self.traversals: list[Traversal] = []

    @property
    def net(self) -> NetModel:
        return self.sim.net

    def reveal_hubs(self, trav: Traversal) -> frozenset[int]:
        if self.reveal_policy is None:
            return frozenset({trav.k - 1})
        return frozenset(j for j in self.reveal_policy.decrypt_hub_indices if j < trav.k)

    def draw_delays(self, path: PathSpec) -> list[int]:
        sizes = [len(h.members) for h in path.hubs]
        return self.net.sample(self.delay_rng, delay_slots(sizes, self.mode)).tolist()

    def make(self, tx: Transaction, path: PathSpec, delays: list[int],
             deviation: Deviation = HONEST) -> Traversal:
        cls = IterativeTraversal if self.mode is TraversalMode.ITERATIVE else RecursiveTraversal
        return cls(self, tx, path, delays, deviation)

    def submit(self, tx: Transaction, topology: Topology, path_ids: Iterable[int],
               deviations: Mapping[int, Deviation] | None = None) -> list[Traversal]:
        """One traversal per distinct path id, launched at the transaction's submit time."""
        ids = sorted(set(int(p) for p in path_ids))
        for p in ids:
            if not 0 <= p < self.params.paths_per_block:
                raise KeyError(f"unknown path {p}")
        deviations = deviations or {}
        started = []
        for p in ids:
            path = topology.path(p)
            trav = self.make(tx, path, self.draw_delays(path), deviations.get(p, HONEST))
            self.sim.schedule(tx.submit_time, trav.launch)
            started.append(trav)
        self.traversals.extend(started)
        return started

    def _delivered(self, trav: Traversal) -> None:
        if self.on_deliver is not None:
            self.on_deliver(trav)


def replay(trav: Traversal, deviation: Deviation = HONEST, *, cooperate: bool = True) -> Traversal:
    """Re-run one traversal alone with the same delays, clocks and corrupted set."""
    src = trav.router
    sim = Simulator(src.sim.clock, src.sim.net, src.sim.corrupted)
    router = Router(sim, src.params, src.mode, src.delay_rng, cooperate=cooperate,
                    stamp=src.stamp, reveal_policy=src.reveal_policy)
    copy = router.make(trav.tx, trav.path, trav.delays, deviation)
    sim.schedule(trav.tx.submit_time, copy.launch)
    sim.run()
    return copy


def honest_approvals(path: PathSpec, delays: Sequence[int], offsets: Sequence[int],
                     corrupted: frozenset[NodeId], mode: TraversalMode, submit_time: int,
                     params: SystemParams,
                     stamp: StampRule = StampRule.THRESHOLD) -> tuple[HubApproval, ...]:
    """Approvals an all-honest traversal produces, computed without the event loop.

    Events are ranked by (due, rank of the event that scheduled them, send
    index), which is exactly the order the simulator's sequence counter gives.
    """
    members = [h.members for h in path.hubs]
    sizes = [len(m) for m in members]
    thresholds = [h.threshold_for(params) for h in path.hubs]
    k = len(members)
    init = members[0][0]

    def hop(src: NodeId, dst: NodeId, slot: int) -> int:
        return 0 if src in corrupted and dst in corrupted else delays[slot]

    t0 = submit_time + delays[0]
    if mode is TraversalMode.ITERATIVE:
        approvals = []
        now = t0
        base = 1
        for j in range(k):
            q = sizes[j]
            rows = []
            for m, node in enumerate(members[j]):
                got = now + hop(init, node, base + m)
                rows.append((got + hop(node, init, base + q + m), got, m, node,
                             got + offsets[node]))
            rows.sort()
            first = rows[:thresholds[j]]
            approvals.append(HubApproval(j, stamp.pick([r[4] for r in first]),
                                         frozenset(r[3] for r in first)))
            now = first[-1][0]
            base += 2 * q
        return tuple(approvals)

    root = (t0, ())
    # ready[m] = (event rank, chain of approvals held by member m of the current hub)
    ready = []
    for m, node in enumerate(members[0]):
        due = t0 + hop(init, node, 1 + m)
        ready.append(((due, root, m), ()))
    base = 1 + sizes[0]
    for j in range(k - 1):
        nxt = members[j + 1]
        inbox: list[list] = [[] for _ in nxt]
        for m, node in enumerate(members[j]):
            rank, chain = ready[m]
            ts = rank[0] + offsets[node]
            for r, dst in enumerate(nxt):
                due = rank[0] + hop(node, dst, base + m * len(nxt) + r)
                inbox[r].append(((due, rank, r), node, ts, chain))
        base += sizes[j] * len(nxt)
        ready = []
        for r in range(len(nxt)):
            first = sorted(inbox[r], key=lambda e: e[0])[:thresholds[j]]
            last = first[-1]
            appr = HubApproval(j, stamp.pick([e[2] for e in first]),
                               frozenset(e[1] for e in first))
            ready.append((last[0], last[3] + (appr,)))
    final = []
    for m, node in enumerate(members[-1]):
        rank, chain = ready[m]
        due = rank[0] + delays[base + m]
        final.append(((due, rank, 0), node, rank[0] + offsets[node], chain))
    first = sorted(final, key=lambda e: e[0])[:thresholds[-1]]
    last = first[-1]
    return last[3] + (HubApproval(k - 1, stamp.pick([e[2] for e in first]),
                                  frozenset(e[1] for e in first)),)


def honest_locked_ts(trav: Traversal) -> int:
    sim = trav.router.sim
    approvals = honest_approvals(trav.path, trav.delays, sim.clock.offsets, sim.corrupted,
                                 trav.router.mode, trav.tx.submit_time, trav.router.params,
                                 trav.router.stamp)
    return locked_timestamp_of(approvals)


def reveal(trav: Traversal, policy: RevealPolicy | None = None) -> RevealRecord:
    """When the adversary could first read the payload carried by this traversal."""
    tx = trav.tx
    contacts = trav.contacts
    if not tx.hidden:
        first = min((c[0] for c in contacts), default=INF)
        if trav.delivered_at is not None:
            first = min(first, trav.delivered_at)
        return RevealRecord(tx.id, trav.path.path_id, first, INF)
    if policy is None:
        policy = trav.router.reveal_policy or RevealPolicy.last_hub(trav.k)
    positions = sorted(j for j in policy.decrypt_hub_indices if j < trav.k)
    if not positions:
        raise ValueError("no decryption hub on this path")

    def opened(j: int) -> float:
        got = sorted(trav.receipts[j])
        need = trav.thresholds[j]
        return got[need - 1] if len(got) >= need else INF

    def captured(j: int) -> bool:
        return len(trav.bad[j]) >= trav.thresholds[j]

    cipher_contact = min((c[0] for c in contacts if c[2]), default=INF)
    if policy.layered:
        release_hubs = [positions[-1]]
        release = opened(positions[-1])
        early = cipher_contact if all(captured(j) for j in positions) else INF
    else:
        release_hubs = positions
        release = min(opened(j) for j in positions)
        early = cipher_contact if any(captured(j) for j in positions) else INF

    known = early
    for j in release_hubs:
        t_open = opened(j)
        if t_open == INF:
            continue
        if trav.bad[j]:
            known = min(known, t_open)
        if trav.router.mode is TraversalMode.ITERATIVE:
            if trav.path.initiator in trav.router.corrupted:
                known = min(known, trav.hub_done[j])
        else:
            later = (c[0] for c in contacts if c[1] > j and c[0] >= t_open)
            known = min(known, min(later, default=INF))
    if trav.delivered_at is not None and release < INF:
        known = min(known, trav.delivered_at)
    return RevealRecord(tx.id, trav.path.path_id, known, release)
