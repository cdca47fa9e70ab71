"""Static adversary: corruption, path power, timestamp tactics, sandwich scenarios."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import HubSpec, HubType, NodeId, PathSpec, SystemParams, TimestampKind, classify_hub
from .routing import HONEST, Deviation, Traversal, honest_locked_ts, replay
from .simnet import stream


class PathClass(enum.Enum):
    REGULAR = "regular"
    MIXED = "mixed"
    CORRUPTED = "corrupted"
    CONTAINS_IMPASSE = "contains_impasse"


class TacticKind(enum.Enum):
    NONE = "none"
    DELAY = "delay"
    ADVANCE_REUSE = "advance_reuse"
    ADVANCE_CHAIN = "advance_chain"
    FORGE = "forge"


@dataclass(frozen=True)
class Tactic:
    kind: TacticKind = TacticKind.NONE
    # ticks to withhold for DELAY (None stalls the path); timestamp for FORGE
    amount: int | None = None
    timestamp: int = 0

    @classmethod
    def delay(cls, amount: int | None) -> "Tactic":
        return cls(TacticKind.DELAY, amount)

    @classmethod
    def forge(cls, timestamp: int) -> "Tactic":
        return cls(TacticKind.FORGE, timestamp=timestamp)


NO_TACTIC = Tactic()
ADVANCE_REUSE = Tactic(TacticKind.ADVANCE_REUSE)
ADVANCE_CHAIN = Tactic(TacticKind.ADVANCE_CHAIN)


@dataclass
class AdversaryState:
    corrupted: frozenset[NodeId]
    n: int
    schedule: dict[tuple[bytes, int], Tactic] = field(default_factory=dict)

    @property
    def f(self) -> int:
        return len(self.corrupted)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.bool_)
        out[list(self.corrupted)] = True
        return out


def corrupt(seed: int, n: int, f: int, *, bft: bool = True) -> AdversaryState:
    """Uniform f-subset of the n nodes from the run's corruption stream."""
    if not 0 <= f <= n:
        raise ValueError(f"cannot corrupt {f} of {n} nodes")
    if bft and f > (n - 1) // 3:
        raise ValueError(f"f={f} exceeds (n-1)/3 for n={n}; pass bft=False to stress")
    rng = stream(seed, "corruption")
    picked = rng.choice(n, size=f, replace=False) if f else ()
    return AdversaryState(frozenset(int(x) for x in picked), n)


def hub_type(hub: HubSpec, corrupted: frozenset[NodeId], params: SystemParams) -> HubType:
    bad = sum(1 for m in hub.members if m in corrupted)
    return classify_hub(len(hub.members) - bad, bad, hub.threshold_for(params))


def hub_types(path: PathSpec, corrupted: frozenset[NodeId],
              params: SystemParams) -> list[HubType]:
    return [hub_type(h, corrupted, params) for h in path.hubs]


def classify_path(path: PathSpec, adv: AdversaryState, params: SystemParams) -> PathClass:
    return classify_types(hub_types(path, adv.corrupted, params))


def classify_types(types: Sequence[HubType]) -> PathClass:
    if any(t is HubType.IMPASSE for t in types):
        return PathClass.CONTAINS_IMPASSE
    if all(t is HubType.CORRUPTED for t in types):
        return PathClass.CORRUPTED
    if all(t is HubType.REGULAR for t in types):
        return PathClass.REGULAR
    return PathClass.MIXED


# ---------------------------------------------------------------- feasibility

def delay_floor(params: SystemParams) -> int:
    """Smallest Delay amount guaranteed to land strictly after the honest outcome."""
    return 2 * params.k * params.delta_net + 2 * params.delta_clock + 1


def _honest_can_approve(t: HubType) -> bool:
    return t in (HubType.REGULAR, HubType.BOTH)


def delay_hub(types: Sequence[HubType]) -> int | None:
    for j, t in enumerate(types):
        if not _honest_can_approve(t):
            return j
    return None


def corrupted_tail(types: Sequence[HubType]) -> int:
    x = 0
    for t in reversed(types):
        if t is not HubType.CORRUPTED:
            break
        x += 1
    return x


def corrupted_run(types: Sequence[HubType]) -> tuple[int, int] | None:
    """First maximal run of at least two consecutive corrupted hubs."""
    j = 0
    k = len(types)
    while j < k:
        if types[j] is HubType.CORRUPTED:
            end = j
            while end + 1 < k and types[end + 1] is HubType.CORRUPTED:
                end += 1
            if end > j:
                return (j, end)
            j = end + 1
        else:
            j += 1
    return None


def is_feasible(kind: TacticKind, types: Sequence[HubType]) -> bool:
    if kind is TacticKind.NONE:
        return True
    if kind is TacticKind.DELAY:
        return delay_hub(types) is not None
    if kind is TacticKind.ADVANCE_REUSE:
        x = corrupted_tail(types)
        return 1 <= x < len(types)
    if kind is TacticKind.ADVANCE_CHAIN:
        return corrupted_run(types) is not None
    if kind is TacticKind.FORGE:
        return all(t is HubType.CORRUPTED for t in types)
    raise ValueError(kind)


def feasible_tactics(path: PathSpec, adv: AdversaryState, params: SystemParams,
                     allowed: Iterable[TacticKind] = tuple(TacticKind),
                     types: Sequence[HubType] | None = None) -> list[TacticKind]:
    if types is None:
        types = hub_types(path, adv.corrupted, params)
    return [k for k in allowed if k is not TacticKind.NONE and is_feasible(k, types)]


def apply_tactic(path: PathSpec, tactic: Tactic, adv: AdversaryState, params: SystemParams,
                 types: Sequence[HubType] | None = None) -> tuple[Deviation, bool]:
    """Translate a tactic into traversal behaviour; infeasible ones fall back to honest."""
    if types is None:
        types = hub_types(path, adv.corrupted, params)
    kind = tactic.kind
    if kind is TacticKind.NONE or not is_feasible(kind, types):
        return HONEST, kind is TacticKind.NONE
    if kind is TacticKind.DELAY:
        if tactic.amount is not None and tactic.amount < 0:
            raise ValueError("delay amount must be non-negative")
        return Deviation(delay_hub=delay_hub(types), delay_amount=tactic.amount), True
    if kind is TacticKind.ADVANCE_REUSE:
        return Deviation(reuse_from=len(types) - corrupted_tail(types)), True
    if kind is TacticKind.ADVANCE_CHAIN:
        return Deviation(chain=corrupted_run(types)), True
    return Deviation(forge=True, forge_ts=tactic.timestamp), True


@dataclass(frozen=True)
class TacticPolicy:
    """Which tactics the adversary uses and how it picks among feasible ones."""

    allowed: tuple[TacticKind, ...] = (TacticKind.DELAY, TacticKind.ADVANCE_REUSE,
                                       TacticKind.ADVANCE_CHAIN)
    aggression: float = 1.0  # chance of acting on a path where some tactic is feasible
    delay_spread: int | None = None  # extra ticks above delay_floor; default 4x threshold
    stall_fraction: float = 0.0
    forge_offset: int = 0  # forged timestamp relative to the transaction's submit time

    def choose(self, rng: np.random.Generator, path: PathSpec, adv: AdversaryState,
               params: SystemParams, submit_time: int = 0,
               types: Sequence[HubType] | None = None) -> Tactic:
        options = feasible_tactics(path, adv, params, self.allowed, types)
        # draw a fixed number of variates per path so the stream stays aligned
        u_act, u_pick, u_stall, u_amt = rng.random(4)
        if not options or u_act >= self.aggression:
            return NO_TACTIC
        kind = options[int(u_pick * len(options))]
        if kind is TacticKind.DELAY:
            if u_stall < self.stall_fraction:
                return Tactic.delay(None)
            spread = (self.delay_spread if self.delay_spread is not None
                      else 4 * params.fairness_threshold)
            return Tactic.delay(delay_floor(params) + int(u_amt * (spread + 1)))
        if kind is TacticKind.FORGE:
            return Tactic.forge(submit_time + self.forge_offset)
        return Tactic(kind)


# ---------------------------------------------------------------- ground truth

def label(trav: Traversal, counterfactual_ts: int | None) -> TimestampKind | None:
    """Kind of a produced certificate against the all-honest replay of its path."""
    if trav.certificate is None:
        return None
    if trav.deviation.forge:
        return TimestampKind.ARBITRARY
    if counterfactual_ts is None:
        raise ValueError("honest replay of a path must always complete")
    ts = trav.certificate.locked_ts
    if ts < counterfactual_ts:
        return TimestampKind.ADVANCED
    if ts > counterfactual_ts:
        return TimestampKind.DELAYED
    return TimestampKind.TRUE


def honest_timestamp(trav: Traversal, *, event_replay: bool = False) -> int | None:
    """Locked timestamp of the same path with every node honest.

    The closed-form evaluator is the default; ``event_replay`` reruns the
    traversal through the simulator instead and must agree with it.
    """
    if not event_replay:
        return honest_locked_ts(trav)
    copy = replay(trav, HONEST, cooperate=True)
    return None if copy.certificate is None else copy.certificate.locked_ts


def needs_replay(trav: Traversal) -> bool:
    return trav.deviation.active or (not trav.router.cooperate and any(trav.bad))


def ground_truth(trav: Traversal) -> tuple[TimestampKind | None, int | None]:
    """(kind, honest locked timestamp); replays only paths where behaviour diverged."""
    if trav.certificate is None:
        return None, honest_timestamp(trav) if needs_replay(trav) else None
    if not needs_replay(trav):
        return TimestampKind.TRUE, trav.certificate.locked_ts
    cf = honest_timestamp(trav)
    return label(trav, cf), cf


# ---------------------------------------------------------------- sandwich

@dataclass
class ConstantProductPool:
    """x*y = const market; fee is taken from the input side."""

    reserve_x: float
    reserve_y: float
    fee: float = 0.003

    def copy(self) -> "ConstantProductPool":
        return ConstantProductPool(self.reserve_x, self.reserve_y, self.fee)

    def quote_x_for_y(self, dx: float) -> float:
        eff = dx * (1.0 - self.fee)
        return self.reserve_y * eff / (self.reserve_x + eff)

    def quote_y_for_x(self, dy: float) -> float:
        eff = dy * (1.0 - self.fee)
        return self.reserve_x * eff / (self.reserve_y + eff)

    def swap_x_for_y(self, dx: float) -> float:
        out = self.quote_x_for_y(dx)
        self.reserve_x += dx
        self.reserve_y -= out
        return out

    def swap_y_for_x(self, dy: float) -> float:
        out = self.quote_y_for_x(dy)
        self.reserve_y += dy
        self.reserve_x -= out
        return out


@dataclass(frozen=True)
class SandwichPlan:
    victim: bytes
    knowledge_time: float
    victim_ts: int
    lead: int
    feasible: bool
    front_submit: float
    front_amount: float
    victim_amount: float
    expected_loss: float


def plan_sandwich(victim: bytes, knowledge_time: float, victim_ts: int, params: SystemParams,
                  pool: ConstantProductPool, *, victim_amount: float, front_amount: float,
                  lead: int | None = None) -> SandwichPlan:
    """Front-run is placeable only if it can be timestamped ahead of the victim.

    ``lead`` is the time the adversary needs between learning the payload and
    the victim's canonical timestamp; it defaults to two network legs.
    """
    lead = 2 * params.delta_net if lead is None else lead
    feasible = knowledge_time + lead < victim_ts
    # a blind round trip without the victim in between just pays the fee twice
    probe = pool.copy()
    got = probe.swap_x_for_y(front_amount)
    loss = front_amount - probe.swap_y_for_x(got)
    return SandwichPlan(victim, knowledge_time, victim_ts, lead, feasible,
                        knowledge_time if feasible else math.inf, front_amount, victim_amount,
                        loss)


@dataclass(frozen=True)
class SandwichOutcome:
    success: bool
    profit: float


def evaluate_sandwich(plan: SandwichPlan, order: Sequence[bytes], front: bytes, back: bytes,
                      pool: ConstantProductPool) -> SandwichOutcome:
    """Replay the three swaps in ledger order; success means front < victim < back."""
    pos = {tx: i for i, tx in enumerate(order)}
    if front not in pos or back not in pos or plan.victim not in pos:
        return SandwichOutcome(False, -plan.expected_loss if plan.feasible else 0.0)
    market = pool.copy()
    held_y = 0.0
    spent_x = 0.0
    returned_x = 0.0
    for tx in sorted((front, plan.victim, back), key=pos.__getitem__):
        if tx == front:
            held_y += market.swap_x_for_y(plan.front_amount)
            spent_x += plan.front_amount
        elif tx == back:
            returned_x += market.swap_y_for_x(held_y)
            held_y = 0.0
        else:
            market.swap_x_for_y(plan.victim_amount)
    success = pos[front] < pos[plan.victim] < pos[back]
    return SandwichOutcome(success, returned_x - spent_x)
