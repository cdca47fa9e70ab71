"""Full end-to-end trials: workload, routing, adversary, consensus, ordering."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import itertools
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, TextIO

import numpy as np

from .. import adversary as adv_mod
from ..adversary import AdversaryState, PathClass, TacticKind
from ..assignment import BlockRandomness, DecryptionSet, Topology
from ..consensus import CensorshipMode, CensorshipModel, Consensus
from ..core import SystemParams, TimestampKind, Transaction
from ..ordering import (canonical_entries, check_fairness, delayed_filter_counterexamples,
                        honest_basis, total_order)
from ..routing import Router, StampRule, Traversal, TraversalMode, reveal, verify_certificate
from ..simnet import ClockModel, NetModel, Simulator, stream, trial_seed
from .config import ExperimentConfig
from .stats import percentiles, wilson_interval


@dataclass
class Simulation:
    """Everything one trial produced, kept for inspection and tests."""

    config: ExperimentConfig
    seed: int
    params: SystemParams
    adversary: AdversaryState
    transactions: list[Transaction]
    traversals: list[Traversal]
    classes: dict[tuple[bytes, int], PathClass]
    tactics: dict[tuple[bytes, int], adv_mod.Tactic]
    kinds: dict[tuple[bytes, int], TimestampKind | None]
    honest_ts: dict[tuple[bytes, int], int | None]
    consensus: Consensus
    topologies: dict[int, Topology]
    ledger: list = field(default_factory=list)
    entries: dict = field(default_factory=dict)
    true_ts: dict = field(default_factory=dict)
    verdict: Any = None
    delayed_counterexamples: int = 0


def default_interval(params: SystemParams, lag: int | None = None) -> int:
    lag = 2 * params.k * params.delta_net + params.delta_clock if lag is None else lag
    return lag + 1


def make_workload(cfg: ExperimentConfig, seed: int) -> list[Transaction]:
    w = cfg.workload
    rng = stream(seed, "workload")
    gaps = rng.exponential(w.mean_gap, size=w.transactions) if w.mean_gap > 0 else \
        np.zeros(w.transactions)
    hidden = rng.random(w.transactions) < w.hidden_fraction
    times = np.floor(np.cumsum(gaps)).astype(np.int64)
    return [Transaction.synthetic(i, int(times[i]), w.payload_len, f"client-{seed}",
                                  bool(hidden[i]))
            for i in range(w.transactions)]


def simulate(cfg: ExperimentConfig, seed: int | None = None, *,
             decryption: DecryptionSet | None = None, trace: TextIO | None = None,
             extra: list[tuple[Transaction, list[int]]] | None = None) -> Simulation:
    """Run one trial. ``extra`` injects client transactions with fixed path choices."""
    seed = cfg.seed if seed is None else seed
    params = cfg.params.validate(bft=cfg.adversary.bft)
    mode = cfg.traversal_mode()
    clock = ClockModel.sample(params.n, params.delta_clock, seed)
    net = NetModel(params.delta_net, cfg.net.min_delay, cfg.net.distribution)
    adversary = adv_mod.corrupt(seed, params.n, params.f, bft=cfg.adversary.bft)
    sim = Simulator(clock, net, adversary.corrupted, trace)
    delivered: list[Traversal] = []
    router = Router(sim, params, mode, stream(seed, "delays"),
                    cooperate=cfg.adversary.cooperate, stamp=StampRule(cfg.stamp_rule),
                    reveal_policy=cfg.reveal.policy(params.k), on_deliver=delivered.append)
    interval = cfg.consensus.block_interval or default_interval(params, cfg.consensus.lag)

    topologies: dict[int, Topology] = {}

    def topology(block: int) -> Topology:
        top = topologies.get(block)
        if top is None:
            top = Topology(BlockRandomness.derive(seed, block), params, decryption)
            topologies[block] = top
        return top

    txs = make_workload(cfg, seed)
    path_rng = stream(seed, "paths")
    tactic_rng = stream(seed, "tactics")
    policy = cfg.adversary.policy()
    paths_total = params.paths_per_block
    want = min(cfg.workload.paths_per_tx, paths_total)
    classes: dict[tuple[bytes, int], PathClass] = {}
    tactics: dict[tuple[bytes, int], adv_mod.Tactic] = {}

    jobs = [(tx, None) for tx in txs] + [(tx, list(p)) for tx, p in (extra or [])]
    for tx, fixed in jobs:
        top = topology(tx.submit_time // interval)
        if fixed is None:
            ids = path_rng.choice(paths_total, size=want, replace=False).tolist() if want else []
        else:
            ids = fixed
        deviations = {}
        for p in sorted(set(ids)):
            path = top.path(p)
            key = (tx.id, p)
            types = adv_mod.hub_types(path, adversary.corrupted, params)
            classes[key] = adv_mod.classify_types(types)
            tactic = policy.choose(tactic_rng, path, adversary, params, tx.submit_time, types)
            dev, ok = adv_mod.apply_tactic(path, tactic, adversary, params, types)
            tactics[key] = tactic if ok else adv_mod.NO_TACTIC
            adversary.schedule[key] = tactics[key]
            deviations[p] = dev
        router.submit(tx, top, ids, deviations)
        if fixed is not None:
            txs.append(tx)
    sim.run()

    kinds: dict[tuple[bytes, int], TimestampKind | None] = {}
    honest_ts: dict[tuple[bytes, int], int | None] = {}
    for trav in router.traversals:
        key = (trav.tx.id, trav.path.path_id)
        kinds[key], honest_ts[key] = adv_mod.ground_truth(trav)

    verifier = _verifier(params, topologies, decryption)
    censorship = _censorship(cfg, seed, delivered, kinds)
    consensus = Consensus(params, interval, verifier, censorship, cfg.consensus.lag)
    for trav in sorted(delivered, key=lambda t: (t.delivered_at, t.tx.id, t.path.path_id)):
        consensus.collect(trav.certificate, trav.delivered_at)
    consensus.drain()

    out = Simulation(cfg, seed, params, adversary, txs, router.traversals, classes, tactics,
                     kinds, honest_ts, consensus, topologies)
    _order(out, delivered)
    return out


def _verifier(params, topologies, decryption):
    def check(cert) -> bool:
        top = topologies.get(cert.block)
        if top is None:
            return False
        return verify_certificate(cert, top.rand, params, decryption, topology=top)
    return check


def _censorship(cfg: ExperimentConfig, seed: int, delivered: list[Traversal],
                kinds) -> CensorshipModel:
    c = cfg.consensus
    mode = c.mode()
    if mode is CensorshipMode.LEADERLESS_CR:
        return CensorshipModel(mode)
    rng = stream(seed, "censorship")
    if mode is CensorshipMode.PROBABILISTIC_KAPPA:
        return CensorshipModel(mode, c.kappa, c.per_certificate, rng=rng)
    # the leader targets transactions that also have a slower certificate to fall back on
    by_tx: dict[bytes, list[tuple[int, TimestampKind]]] = {}
    for trav in delivered:
        key = (trav.tx.id, trav.path.path_id)
        by_tx.setdefault(trav.tx.id, []).append((trav.path.path_id, kinds[key]))
    eligible = sorted(tx for tx, rows in by_tx.items()
                      if any(k is TimestampKind.TRUE for _, k in rows)
                      and any(k is TimestampKind.DELAYED for _, k in rows))
    picks = rng.random(len(eligible)) < c.censor_fraction
    targets = {(tx, p) for tx, hit in zip(eligible, picks) if hit
               for p, k in by_tx[tx] if k is TimestampKind.TRUE}
    return CensorshipModel(mode, targets=targets)


def _order(out: Simulation, delivered: list[Traversal]) -> None:
    committed = list(out.consensus.committed_certs())
    out.entries = canonical_entries(committed)
    out.ledger = total_order(out.entries.values())
    basis = [(t.tx.id, t.certificate.locked_ts) for t in delivered
             if out.classes.get((t.tx.id, t.path.path_id)) is PathClass.REGULAR
             and out.kinds.get((t.tx.id, t.path.path_id)) is TimestampKind.TRUE]
    out.true_ts = honest_basis(basis)
    forged = {c.cert.tx for c in committed
              if out.kinds.get(c.cert.key) is TimestampKind.ARBITRARY}
    out.verdict = check_fairness(out.ledger, out.true_ts, out.params, excluded=forged)
    labelled = [(c, out.kinds.get(c.cert.key)) for c in committed]
    out.delayed_counterexamples = delayed_filter_counterexamples(out.entries, labelled)


# ---------------------------------------------------------------- per-trial metrics

def timing_bound(params: SystemParams, mode: TraversalMode) -> int:
    """Longest honest time from initiator receipt to the last hub approval."""
    if mode is TraversalMode.ITERATIVE:
        return 2 * params.k * params.delta_net
    return params.k * params.delta_net


def trial_metrics(s: Simulation) -> dict[str, Any]:
    params = s.params
    mode = s.config.traversal_mode()
    travs = s.traversals
    n_tx = len(s.transactions)
    committed_tx = len(s.entries)
    class_counts = Counter(c.value for c in s.classes.values())
    kind_counts = Counter(k.value for k in s.kinds.values() if k is not None)
    tactic_counts = Counter(t.kind.value for t in s.tactics.values())
    completed = [t for t in travs if t.certificate is not None]
    honest_done = [t for t in completed if not t.deviation.active]
    mismatches = sum(1 for t in honest_done if not t.honest_counts_match())
    bound = timing_bound(params, mode)
    late = sum(1 for t in honest_done if t.approved_at - t.start > bound)
    sub_bytes = Counter()
    for t in travs:
        sub_bytes[t.tx.id] += t.bytes
    latencies = [t.delivered_at - t.tx.submit_time for t in completed]
    v = s.verdict
    return {
        "seed": s.seed,
        "transactions": n_tx,
        "committed_transactions": committed_tx,
        "commit_rate": committed_tx / n_tx if n_tx else 0.0,
        "traversals": len(travs),
        "completed": len(completed),
        "stalled": len(travs) - len(completed),
        "certificates_committed": len(s.consensus.committed),
        "certificates_censored": len(s.consensus.censored),
        "certificates_rejected": s.consensus.rejected,
        "blocks": len(s.consensus.chain),
        "paths": dict(sorted(class_counts.items())),
        "kinds": dict(sorted(kind_counts.items())),
        "tactics": dict(sorted(tactic_counts.items())),
        "fairness_pairs": v.pairs_checked,
        "fairness_violations": v.violation_count,
        "fairness_excluded_pairs": v.excluded_pairs,
        "fairness_threshold": v.threshold_used,
        "delayed_counterexamples": s.delayed_counterexamples,
        "counting_rule_mismatches": mismatches,
        "timing_bound": bound,
        "timing_bound_exceeded": late,
        "bytes_per_tx": float(np.mean(list(sub_bytes.values()))) if sub_bytes else 0.0,
        "latency": percentiles(latencies),
        "messages": int(sum(t.messages + t.delivery_messages for t in travs)),
    }


def _run_one(args) -> dict[str, Any]:
    cfg, index = args
    return trial_metrics(simulate(cfg, trial_seed(cfg.seed, index)))


@dataclass
class RunReport:
    config: dict[str, Any]
    trials: list[dict[str, Any]]
    aggregate: dict[str, Any]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()

    def to_csv(self) -> str:
        cols = ["seed", "transactions", "committed_transactions", "commit_rate", "completed",
                "stalled", "fairness_pairs", "fairness_violations", "delayed_counterexamples",
                "counting_rule_mismatches", "bytes_per_tx"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial"] + cols)
        for i, row in enumerate(self.trials):
            w.writerow([i] + [row[c] for c in cols])
        return buf.getvalue()


def aggregate(rows: list[dict[str, Any]], confidence: float = 0.99) -> dict[str, Any]:
    tx = sum(r["transactions"] for r in rows)
    committed = sum(r["committed_transactions"] for r in rows)
    trav = sum(r["traversals"] for r in rows)
    done = sum(r["completed"] for r in rows)
    clean = sum(1 for r in rows if r["fairness_violations"] == 0)
    return {
        "trials": len(rows),
        "commit_rate": committed / tx if tx else 0.0,
        "commit_rate_ci": wilson_interval(committed, tx, confidence) if tx else None,
        "completion_rate": done / trav if trav else 0.0,
        "completion_rate_ci": wilson_interval(done, trav, confidence) if trav else None,
        "fairness_violations": sum(r["fairness_violations"] for r in rows),
        "fairness_pairs": sum(r["fairness_pairs"] for r in rows),
        "trials_without_violation": clean,
        "trials_without_violation_ci": wilson_interval(clean, len(rows), confidence)
        if rows else None,
        "delayed_counterexamples": sum(r["delayed_counterexamples"] for r in rows),
        "counting_rule_mismatches": sum(r["counting_rule_mismatches"] for r in rows),
        "timing_bound_exceeded": sum(r["timing_bound_exceeded"] for r in rows),
        "bytes_per_tx": float(np.mean([r["bytes_per_tx"] for r in rows])) if rows else 0.0,
    }


def run(cfg: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Independent trials with per-trial seeds; worker count never changes the result."""
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    return RunReport(cfg.to_dict(), rows, aggregate(rows))


def reveal_records(s: Simulation):
    return [reveal(t) for t in s.traversals]


def tactic_kinds() -> list[str]:
    return [k.value for k in TacticKind if k is not TacticKind.NONE]


def _override(cfg: ExperimentConfig, dotted: str, value) -> ExperimentConfig:
    section, _, name = dotted.partition(".")
    if not name:
        return cfg.with_(**{section: value})
    part = getattr(cfg, section)
    if section == "params":
        return cfg.with_(params=part.replace(**{name: value}))
    return cfg.with_(**{section: dataclasses.replace(part, **{name: value})})


def sweep(cfg: ExperimentConfig, grid: dict[str, list], workers: int | None = None
          ) -> list[dict[str, Any]]:
    """Run every combination of the grid; keys are dotted config paths like ``params.n``."""
    keys = list(grid)
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        point = cfg
        for key, value in zip(keys, combo):
            point = _override(point, key, value)
        report = run(point, workers)
        flat = {}
        for k, v in report.aggregate.items():
            if isinstance(v, (list, tuple)):
                flat[f"{k}_low"], flat[f"{k}_high"] = v
            elif v is not None:
                flat[k] = v
        rows.append({**dict(zip(keys, combo)), **flat})
    return rows


def sweep_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()
