"""Experiment configuration, loadable from TOML.

Example::

    seed = 7
    trials = 4
    mode = "iterative"

    [params]
    n = 64
    f = 21
    q = 4
    t = 3
    k = 2
    delta_net = 10
    delta_clock = 2

    [workload]
    transactions = 2000
    mean_gap = 5.0
    paths_per_tx = 3

    [adversary]
    tactics = ["delay", "advance_reuse", "advance_chain"]

    [consensus]
    censorship = "leaderless_cr"
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from ..adversary import TacticKind, TacticPolicy
from ..consensus import CensorshipMode
from ..core import SystemParams
from ..routing import RevealPolicy, StampRule, TraversalMode

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class WorkloadConfig:
    transactions: int = 1000
    mean_gap: float = 5.0  # mean ticks between submissions (exponential gaps)
    payload_len: int = 250
    hidden_fraction: float = 0.0
    paths_per_tx: int = 3

    def __post_init__(self):
        if self.transactions < 0 or self.paths_per_tx < 0 or self.mean_gap < 0:
            raise ValueError("workload sizes must be non-negative")
        if not 0.0 <= self.hidden_fraction <= 1.0:
            raise ValueError("hidden_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class AdversaryConfig:
    tactics: tuple[str, ...] = ("delay", "advance_reuse", "advance_chain")
    aggression: float = 1.0
    delay_spread: int | None = None
    stall_fraction: float = 0.0
    forge_offset: int = 0
    cooperate: bool = True  # corrupted nodes sign normally when no tactic applies
    bft: bool = True

    def policy(self) -> TacticPolicy:
        return TacticPolicy(tuple(TacticKind(t) for t in self.tactics), self.aggression,
                            self.delay_spread, self.stall_fraction, self.forge_offset)


@dataclass(frozen=True)
class ConsensusConfig:
    block_interval: int | None = None  # default: lag + 1
    lag: int | None = None
    censorship: str = "leaderless_cr"
    kappa: float = 0.0
    per_certificate: bool = False
    # LeaderCensor: share of eligible transactions whose True certificates are removed
    censor_fraction: float = 1.0

    def mode(self) -> CensorshipMode:
        return CensorshipMode(self.censorship)


@dataclass(frozen=True)
class NetConfig:
    min_delay: int = 1
    distribution: str = "uniform"


@dataclass(frozen=True)
class RevealConfig:
    decrypt_hubs: tuple[int, ...] | None = None  # None: last hub
    layered: bool = False

    def policy(self, k: int) -> RevealPolicy:
        hubs = self.decrypt_hubs if self.decrypt_hubs is not None else (k - 1,)
        return RevealPolicy(frozenset(hubs), self.layered)


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    consensus: ConsensusConfig = field(default_factory=ConsensusConfig)
    net: NetConfig = field(default_factory=NetConfig)
    reveal: RevealConfig = field(default_factory=RevealConfig)
    mode: str = "iterative"
    stamp_rule: str = "threshold"  # threshold | max | median
    trials: int = 1
    seed: int = 0
    workers: int = 1

    def traversal_mode(self) -> TraversalMode:
        return TraversalMode(self.mode)

    def to_dict(self) -> dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        if "params" not in data:
            raise ValueError("config needs a [params] table")
        parts = {
            "params": SystemParams,
            "workload": WorkloadConfig,
            "adversary": AdversaryConfig,
            "consensus": ConsensusConfig,
            "net": NetConfig,
            "reveal": RevealConfig,
        }
        kwargs: dict[str, Any] = {}
        for key, typ in parts.items():
            if key in data:
                kwargs[key] = _build(typ, data.pop(key), key)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs.update(data)
        cfg = cls(**kwargs)
        TraversalMode(cfg.mode)
        StampRule(cfg.stamp_rule)
        return cfg

    def with_(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _build(typ, table: dict[str, Any], where: str):
    names = {f.name for f in dataclasses.fields(typ)}
    unknown = set(table) - names
    if unknown:
        raise ValueError(f"unknown keys in [{where}]: {sorted(unknown)}")
    table = {k: tuple(v) if isinstance(v, list) else v for k, v in table.items()}
    return typ(**table)


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        return ExperimentConfig.from_dict(tomllib.load(fh))


def loads_config(text: str) -> ExperimentConfig:
    return ExperimentConfig.from_dict(tomllib.loads(text))
