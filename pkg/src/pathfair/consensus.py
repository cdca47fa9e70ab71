"""A single logical sequencer standing in for a censorship-resistant BFT ledger.

Block i is formed at true time ``i * interval``. Its timestamp window is
``[previous max_ts + 1, i * interval - lag]``. The lag (default 2*k*Delta +
delta) is long enough that an honestly produced certificate always reaches the
sequencer before the block whose window contains its locked timestamp, so
honest timestamps are committed unchanged. Certificates stamped beyond the
window wait for a later block. Certificates stamped before it (late arrivals)
are committed at the window's lower edge.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .core import Certificate, SystemParams


class CensorshipMode(enum.Enum):
    LEADERLESS_CR = "leaderless_cr"
    PROBABILISTIC_KAPPA = "probabilistic_kappa"
    LEADER_CENSOR = "leader_censor"


@dataclass
class CensorshipModel:
    mode: CensorshipMode = CensorshipMode.LEADERLESS_CR
    kappa: float = 0.0
    per_certificate: bool = False
    # (tx id, path id) keys the censoring leader removes
    targets: set[tuple[bytes, int]] = field(default_factory=set)
    rng: np.random.Generator | None = None
    _decided: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError("kappa must lie in [0, 1]")
        if self.mode is CensorshipMode.PROBABILISTIC_KAPPA and self.rng is None:
            raise ValueError("probabilistic censorship needs an rng")

    def drops(self, cert: Certificate) -> bool:
        if self.mode is CensorshipMode.LEADERLESS_CR:
            return False
        if self.mode is CensorshipMode.LEADER_CENSOR:
            return cert.key in self.targets
        key = cert.key if self.per_certificate else cert.tx
        got = self._decided.get(key)
        if got is None:
            got = bool(self.rng.random() < self.kappa)
            self._decided[key] = got
        return got


@dataclass(frozen=True)
class CommittedCert:
    cert: Certificate
    effective_ts: int
    block: int
    arrival: int

    @property
    def raw_ts(self) -> int:
        return self.cert.locked_ts


@dataclass(frozen=True)
class Block:
    number: int
    formed_at: int
    min_ts: int | None
    max_ts: int
    certs: tuple[CommittedCert, ...]


def place_late_timestamp(cert: Certificate, min_ts: int | None) -> int:
    """Earliest timestamp the block window allows; the raw value stays on the certificate."""
    if min_ts is None:
        return cert.locked_ts
    return max(cert.locked_ts, min_ts)


class Consensus:
    def __init__(self, params: SystemParams, interval: int,
                 verifier: Callable[[Certificate], bool] | None = None,
                 censorship: CensorshipModel | None = None, lag: int | None = None):
        if interval < 1:
            raise ValueError("block interval must be positive")
        self.params = params
        self.interval = interval
        self.lag = 2 * params.k * params.delta_net + params.delta_clock if lag is None else lag
        self.verifier = verifier
        self.censorship = censorship or CensorshipModel()
        self.chain: list[Block] = []
        self.committed: dict[tuple[bytes, int], CommittedCert] = {}
        self.censored: list[Certificate] = []
        self.rejected = 0
        self._queued: set[tuple[bytes, int]] = set()
        # (first admissible block, tx, path, cert, arrival)
        self._queue: list[tuple[int, bytes, int, Certificate, int]] = []

    def collect(self, cert: Certificate, arrival: int) -> bool:
        """Queue a certificate for the next block; duplicates per (tx, path) are dropped."""
        if self.verifier is not None and not self.verifier(cert):
            self.rejected += 1
            return False
        key = cert.key
        if key in self._queued:
            return True
        self._queued.add(key)
        heapq.heappush(self._queue, (self.admit_block(cert, arrival), cert.tx, cert.path, cert,
                                     arrival))
        return True

    def admit_block(self, cert: Certificate, arrival: int) -> int:
        """First block formed after arrival whose window reaches the locked timestamp."""
        by_arrival = -(-arrival // self.interval)
        by_stamp = -(-(cert.locked_ts + self.lag) // self.interval)
        return max(1, by_arrival, by_stamp)

    @property
    def pending(self) -> int:
        return len(self._queue)

    def window(self, number: int) -> tuple[int | None, int]:
        max_ts = number * self.interval - self.lag
        min_ts = self.chain[-1].max_ts + 1 if self.chain else None
        return min_ts, max_ts

    def form_block(self) -> Block:
        number = len(self.chain) + 1
        min_ts, max_ts = self.window(number)
        ready = []
        while self._queue and self._queue[0][0] <= number:
            ready.append(heapq.heappop(self._queue))
        ready.sort(key=lambda e: (e[3].locked_ts, e[1], e[2]))
        taken = []
        for _, _, _, cert, arrival in ready:
            if self.censorship.drops(cert):
                self.censored.append(cert)
                continue
            taken.append(CommittedCert(cert, place_late_timestamp(cert, min_ts), number, arrival))
        taken.sort(key=lambda c: (c.effective_ts, c.cert.tx, c.cert.path))
        block = Block(number, number * self.interval, min_ts, max_ts, tuple(taken))
        for c in taken:
            self.committed[c.cert.key] = c
        self.chain.append(block)
        return block

    def drain(self, max_blocks: int = 10_000_000) -> list[Block]:
        """Form blocks until nothing is queued; all collection must be finished."""
        made = []
        while self._queue:
            if len(made) >= max_blocks:
                raise RuntimeError("consensus drain exceeded its block budget")
            made.append(self.form_block())
        return made

    def committed_certs(self) -> Iterable[CommittedCert]:
        return self.committed.values()
