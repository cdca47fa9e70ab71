"""Canonical timestamps, the final ledger order, and the fairness checker."""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .consensus import CommittedCert
from .core import SystemParams, TimestampKind


@dataclass(frozen=True, order=True)
class CanonicalEntry:
    canonical_ts: int
    tie_break: bytes
    tx: bytes = field(compare=False)
    path: int = field(compare=False)


def canonical_timestamp(tx: bytes, committed: Iterable[CommittedCert]) -> CanonicalEntry:
    """Earliest effective timestamp among the transaction's committed certificates."""
    best = None
    for c in committed:
        if c.cert.tx != tx:
            continue
        cand = (c.effective_ts, c.cert.path)
        if best is None or cand < best:
            best = cand
    if best is None:
        raise ValueError("transaction has no committed certificate")
    return CanonicalEntry(best[0], tx, tx, best[1])


def canonical_entries(committed: Iterable[CommittedCert]) -> dict[bytes, CanonicalEntry]:
    best: dict[bytes, tuple[int, int]] = {}
    for c in committed:
        cand = (c.effective_ts, c.cert.path)
        cur = best.get(c.cert.tx)
        if cur is None or cand < cur:
            best[c.cert.tx] = cand
    return {tx: CanonicalEntry(ts, tx, tx, p) for tx, (ts, p) in best.items()}


def total_order(entries: Iterable[CanonicalEntry]) -> list[CanonicalEntry]:
    """Sort by (timestamp, digest); repeated transactions keep their earliest entry."""
    seen: dict[bytes, CanonicalEntry] = {}
    for e in entries:
        cur = seen.get(e.tx)
        if cur is None or (e.canonical_ts, e.path) < (cur.canonical_ts, cur.path):
            seen[e.tx] = e
    return sorted(seen.values(), key=lambda e: (e.canonical_ts, e.tie_break))


@dataclass
class FairnessVerdict:
    pairs_checked: int
    violations: list[tuple[bytes, bytes, int]]
    violation_count: int
    threshold_used: int
    excluded_pairs: int = 0

    @property
    def ok(self) -> bool:
        return self.violation_count == 0


def _pairs_beyond(times: list[int], threshold: int) -> int:
    """Ordered pairs (a, b) from a sorted list with b - a > threshold."""
    total = 0
    for i, tb in enumerate(times):
        total += bisect.bisect_left(times, tb - threshold, 0, i)
    return total


def check_fairness(ledger: list[CanonicalEntry], true_ts: Mapping[bytes, int],
                   params: SystemParams, *, excluded: Iterable[bytes] = (),
                   max_examples: int = 1000) -> FairnessVerdict:
    """Every pair separated by more than the threshold must keep its true-time order.

    ``true_ts`` maps a transaction to its earliest honest locked timestamp and
    defines which transactions take part. Transactions in ``excluded`` (those
    with a forged certificate) are left out and their pairs counted apart.
    """
    thr = params.fairness_threshold
    pos = {e.tx: i for i, e in enumerate(ledger)}
    excluded = set(excluded)
    part = sorted((ts, tx) for tx, ts in true_ts.items() if tx in pos)
    kept = [(ts, tx) for ts, tx in part if tx not in excluded]
    everyone = _pairs_beyond([ts for ts, _ in part], thr)

    violations: list[tuple[bytes, bytes, int]] = []
    count = 0
    checked = 0
    # positions of earlier transactions already far enough in the past
    window: list[int] = []
    by_pos = {}
    lo = 0
    for ts_b, tx_b in kept:
        while lo < len(kept) and kept[lo][0] < ts_b - thr:
            p = pos[kept[lo][1]]
            bisect.insort(window, p)
            by_pos[p] = kept[lo]
            lo += 1
        checked += len(window)
        pb = pos[tx_b]
        cut = bisect.bisect_right(window, pb)
        late = len(window) - cut
        if late:
            count += late
            for p in window[cut:]:
                if len(violations) >= max_examples:
                    break
                ts_a, tx_a = by_pos[p]
                violations.append((tx_a, tx_b, ts_b - ts_a))
    return FairnessVerdict(checked, violations, count, thr, everyone - checked)


def honest_basis(records: Iterable[tuple[bytes, int]]) -> dict[bytes, int]:
    """Earliest locked timestamp per transaction from (tx, timestamp) records."""
    out: dict[bytes, int] = {}
    for tx, ts in records:
        cur = out.get(tx)
        if cur is None or ts < cur:
            out[tx] = ts
    return out


def delayed_filter_counterexamples(entries: Mapping[bytes, CanonicalEntry],
                                   labelled: Iterable[tuple[CommittedCert, object]]) -> int:
    """Count committed Delayed certificates that sit below their transaction's canonical time,
    restricted to transactions that also have a committed True certificate."""
    has_true = set()
    delayed = defaultdict(list)
    for c, kind in labelled:
        if kind is TimestampKind.TRUE:
            has_true.add(c.cert.tx)
        elif kind is TimestampKind.DELAYED:
            delayed[c.cert.tx].append(c.effective_ts)
    bad = 0
    for tx in has_true:
        canon = entries[tx].canonical_ts
        bad += sum(1 for ts in delayed.get(tx, ()) if canon > ts)
    return bad
