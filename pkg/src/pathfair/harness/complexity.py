"""Measured traffic per transaction against the closed-form counting rules."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

from ..core import SystemParams
from ..routing import TraversalMode, submission_bytes, submission_messages
from .config import AdversaryConfig, ExperimentConfig, WorkloadConfig
from .experiment import Simulation, simulate
from .stats import r_squared


@dataclass(frozen=True)
class ComplexityRow:
    mode: str
    n: int
    q: int
    k: int
    transactions: int
    measured_bytes: float  # mean submission bytes per transaction
    predicted_bytes: float
    non_payload_bytes: float
    measured_messages: float
    predicted_messages: float
    mismatched_traversals: int

    @property
    def exact(self) -> bool:
        return self.mismatched_traversals == 0 and self.measured_bytes == self.predicted_bytes


def complexity_report(sim: Simulation) -> ComplexityRow:
    """Per-transaction submission traffic of one finished run beside the counting rules.

    Only traversals that ran honestly to completion are counted, since a
    deviating adversary changes the traffic by design.
    """
    params = sim.params
    mode = sim.config.traversal_mode()
    lam = params.lambda_bytes
    per_tx: dict[bytes, list[int]] = {}
    mismatched = 0
    for trav in sim.traversals:
        if trav.deviation.active or not trav.completed:
            continue
        want = submission_bytes(trav.sizes, mode, trav.tx.payload_len, lam, trav.reveal_hubs)
        payload_part = submission_bytes(trav.sizes, mode, trav.tx.payload_len, 0,
                                        trav.reveal_hubs)
        want_msgs = submission_messages(trav.sizes, mode)
        if trav.bytes != want or trav.messages != want_msgs:
            mismatched += 1
        row = per_tx.setdefault(trav.tx.id, [0, 0, 0, 0, 0])
        row[0] += trav.bytes
        row[1] += want
        row[2] += trav.bytes - payload_part
        row[3] += trav.messages
        row[4] += want_msgs
    count = len(per_tx)

    def mean(i: int) -> float:
        return sum(r[i] for r in per_tx.values()) / count if count else 0.0

    return ComplexityRow(mode.value, params.n, params.q, params.k, count, mean(0), mean(1),
                         mean(2), mean(3), mean(4), mismatched)


def log_hub_size(n: int, factor: float = 3.0) -> int:
    return math.ceil(factor * math.log2(n))


def sweep_config(n: int, mode: str = "iterative", *, k: int = 2, factor: float = 3.0,
                 transactions: int = 40, paths_per_tx: int = 3, f: int = 0,
                 seed: int = 0) -> ExperimentConfig:
    q = log_hub_size(n, factor)
    params = SystemParams(n=n, f=f, q=q, t=math.ceil(2 * q / 3), k=k, delta_net=10,
                          delta_clock=2)
    return ExperimentConfig(
        params=params,
        workload=WorkloadConfig(transactions=transactions, mean_gap=20.0,
                                paths_per_tx=paths_per_tx),
        adversary=AdversaryConfig(tactics=()),
        mode=mode, seed=seed)


def complexity_sweep(ns=(64, 128, 256, 512), modes=("iterative", "recursive"),
                     **kwargs) -> list[ComplexityRow]:
    rows = []
    for mode in modes:
        for n in ns:
            rows.append(complexity_report(simulate(sweep_config(n, mode, **kwargs))))
    return rows


@dataclass(frozen=True)
class ScalingFit:
    mode: str
    slope: float  # bytes per unit of log2(n) * lambda
    intercept: float
    r2: float
    growth: list[float]  # per-doubling ratio of non-payload bytes
    growth_limit: list[float]  # log(2n) / log(n) for the same steps


def scaling_fit(rows: list[ComplexityRow], lam: int = 32) -> list[ScalingFit]:
    """Fit non-payload bytes against log2(n) * lambda, one line per traversal mode."""
    fits = []
    for mode in sorted({r.mode for r in rows}):
        sel = sorted((r for r in rows if r.mode == mode), key=lambda r: r.n)
        if len(sel) < 2:
            continue
        x = [math.log2(r.n) * lam for r in sel]
        y = [r.non_payload_bytes for r in sel]
        a, b, r2 = r_squared(x, y)
        growth = [y[i + 1] / y[i] for i in range(len(y) - 1)]
        limit = [math.log(sel[i + 1].n) / math.log(sel[i].n) for i in range(len(sel) - 1)]
        fits.append(ScalingFit(mode, a, b, r2, growth, limit))
    return fits


def rows_to_csv(rows: list[ComplexityRow]) -> str:
    buf = io.StringIO()
    fields = list(asdict(rows[0]).keys()) + ["exact"] if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**asdict(r), "exact": r.exact})
    return buf.getvalue()
