"""Deterministic discrete-event engine with bounded latency and clock skew.

Randomness comes from one root seed split into named, independent streams
(``SeedSequence(root, spawn_key=(stream_id,))``), so adding a consumer of one
stream never shifts the values another stream produces.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from typing import Any, Callable, Collection, TextIO

import numpy as np

from .core import NodeId

STREAM_IDS = {
    "delays": 1,
    "offsets": 2,
    "corruption": 3,
    "workload": 4,
    "paths": 5,
    "censorship": 6,
    "tactics": 7,
}

# Endpoints that are not protocol nodes; links touching them are honest.
CLIENT = -1
CONSENSUS = -2


class SimulationError(RuntimeError):
    pass


def stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(STREAM_IDS[name],)))


def trial_seed(root_seed: int, trial: int) -> int:
    """Seed of trial ``trial``: first 64-bit word of SeedSequence(root, spawn_key=(trial,))."""
    state = np.random.SeedSequence(entropy=root_seed, spawn_key=(0, trial)).generate_state(
        1, dtype=np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class ClockModel:
    offsets: tuple[int, ...]
    bound: int

    def __post_init__(self):
        if any(abs(o) > self.bound for o in self.offsets):
            raise ValueError("clock offset exceeds the skew bound")

    @classmethod
    def sample(cls, n: int, delta_clock: int, seed: int) -> "ClockModel":
        rng = stream(seed, "offsets")
        offs = rng.integers(-delta_clock, delta_clock + 1, size=n)
        return cls(tuple(int(x) for x in offs), delta_clock)

    @classmethod
    def perfect(cls, n: int) -> "ClockModel":
        return cls((0,) * n, 0)

    def local_time(self, node: NodeId, true_time: int) -> int:
        return true_time + self.offsets[node]


@dataclass(frozen=True)
class NetModel:
    """Honest-link delays are integers in [min_delay, delta]."""

    delta: int
    min_delay: int = 1
    distribution: str = "uniform"

    def __post_init__(self):
        if not 0 <= self.min_delay <= self.delta:
            raise ValueError("need 0 <= min_delay <= delta")
        if self.distribution not in {"uniform", "max", "min"}:
            raise ValueError(f"unknown delay distribution {self.distribution!r}")

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.distribution == "max":
            return np.full(size, self.delta, dtype=np.int64)
        if self.distribution == "min":
            return np.full(size, self.min_delay, dtype=np.int64)
        return rng.integers(self.min_delay, self.delta + 1, size=size, dtype=np.int64)


class Simulator:
    def __init__(self, clock: ClockModel, net: NetModel,
                 corrupted: Collection[NodeId] = frozenset(), trace: TextIO | None = None):
        self.clock = clock
        self.net = net
        self.corrupted = frozenset(corrupted)
        self.now = 0
        self.messages = 0
        self.events = 0
        self._queue: list[tuple[int, int, Callable, tuple]] = []
        self._seq = 0
        self._trace = trace

    def schedule(self, due: int, action: Callable[..., Any], *args) -> int:
        if due < self.now:
            raise SimulationError(f"cannot schedule at {due}, current time is {self.now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, (due, seq, action, args))
        return seq

    def send(self, src: NodeId, dst: NodeId, delay: int, action: Callable[..., Any],
             *args) -> int:
        """Deliver ``action(*args)`` at dst after ``delay`` ticks.

        Colluding nodes talk instantly, an adversarial sender may pick any delay
        in [0, delta], and every other link must respect the honest bounds.
        """
        corrupted = self.corrupted
        if src in corrupted:
            if dst in corrupted:
                delay = 0
            elif not 0 <= delay <= self.net.delta:
                raise SimulationError(f"adversarial delay {delay} outside [0, {self.net.delta}]")
        elif not self.net.min_delay <= delay <= self.net.delta:
            raise SimulationError(f"honest delay {delay} outside the network bound")
        self.messages += 1
        seq = self._seq
        self._seq = seq + 1
        heapq.heappush(self._queue, (self.now + delay, seq, action, args))
        return seq

    def read_clock(self, node: NodeId) -> int:
        return self.now + self.clock.offsets[node]

    def pending(self) -> int:
        return len(self._queue)

    def run(self, until: int | None = None) -> int:
        """Fire events in (due, sequence) order; returns the number fired."""
        fired = 0
        queue = self._queue
        pop = heapq.heappop
        trace = self._trace
        while queue:
            if until is not None and queue[0][0] > until:
                self.now = until
                break
            due, seq, action, args = pop(queue)
            self.now = due
            if trace is not None:
                trace.write(json.dumps({"t": due, "seq": seq,
                                        "event": getattr(action, "__qualname__", str(action))}))
                trace.write("\n")
            action(*args)
            fired += 1
        self.events += fired
        return fired
