"""Acceptance checks A1-A9, each returning a verdict plus the numbers behind it."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable

from ..adversary import ConstantProductPool, HubType, hub_types, plan_sandwich
from ..analysis import (binomial_pass_prob, chernoff_pd_bound, kl_divergence, singleton_plan,
                        success_probability)
from ..core import SystemParams
from ..routing import reveal
from .complexity import complexity_sweep, scaling_fit
from .config import (AdversaryConfig, ConsensusConfig, ExperimentConfig, RevealConfig,
                     WorkloadConfig)
from .experiment import run, simulate
from .montecarlo import monte_carlo_corruption


@dataclass
class Verdict:
    name: str
    passed: bool
    summary: str
    details: dict[str, Any] = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} {status} ({self.seconds:.1f}s) {self.summary}"


# singleton setting: n=200, c=1.2, hub = one node
SINGLETON_N = 200
SINGLETON_C = 1.2
SINGLETON_F = (SINGLETON_N - 1) // 3


def singleton_params() -> SystemParams:
    plan = singleton_plan(SINGLETON_N, SINGLETON_C)
    return SystemParams(n=SINGLETON_N, f=SINGLETON_F, q=1, t=1, k=plan.k, c=SINGLETON_C,
                        delta_net=10, delta_clock=2, paths_per_block=plan.paths_per_block)


def fairness_config(transactions: int = 10_000, censorship: str = "leaderless_cr",
                    seed: int = 2024, trials: int = 50) -> ExperimentConfig:
    return ExperimentConfig(
        params=SystemParams(n=64, f=21, q=4, t=3, k=2, delta_net=10, delta_clock=2),
        workload=WorkloadConfig(transactions=transactions, mean_gap=5.0, paths_per_tx=3),
        adversary=AdversaryConfig(tactics=("delay", "advance_reuse", "advance_chain")),
        consensus=ConsensusConfig(censorship=censorship, kappa=0.0),
        trials=trials, seed=seed)


def a1_singleton_success(trials: int = 100_000, seed: int = 11) -> Verdict:
    plan = singleton_plan(SINGLETON_N, SINGLETON_C)
    params = singleton_params()
    mc = monte_carlo_corruption(params, trials, plan.L, seed=seed, paths=0)
    est = mc.regular
    in_band = 0.566 <= plan.success <= 0.586
    ok = plan.k == 11 and in_band and est.covers_analytic
    return Verdict("A1", ok,
                   f"k={plan.k} L={plan.L} analytic={plan.success:.4f} "
                   f"mc={est.rate:.4f} ci99=[{est.low:.4f}, {est.high:.4f}] "
                   f"exact(f={params.f})={est.analytic:.4f}",
                   {"plan": plan.as_dict(), "monte_carlo": mc.as_dict()})


def a2_eight_paths(trials: int = 100_000, seed: int = 12) -> Verdict:
    analytic = success_probability(0.25, 8)
    params = SystemParams(n=180, f=60, q=18, t=12, k=2, delta_net=10, delta_clock=2)
    mc = monte_carlo_corruption(params, trials, 8, seed=seed, paths=0)
    est = mc.regular
    p_h = binomial_pass_prob(18, 12, 2 / 3)
    ok = abs(analytic - 0.89989) <= 1e-4 and abs(est.rate - est.analytic) <= 0.02
    return Verdict("A2", ok,
                   f"analytic(1/4, 8)={analytic:.5f} mc={est.rate:.4f} exact={est.analytic:.4f} "
                   f"|diff|={abs(est.rate - est.analytic):.4f} binomial p_h={p_h:.4f}",
                   {"analytic": analytic, "binomial_p_h": p_h, "monte_carlo": mc.as_dict()})


def a3_corruption_bound(trials: int = 100_000, seed: int = 13) -> Verdict:
    params = singleton_params()
    mc = monte_carlo_corruption(params, trials, 0, seed=seed)
    est = mc.corrupted
    target = SINGLETON_N ** -SINGLETON_C
    ok = est.high <= target
    return Verdict("A3", ok,
                   f"hits={est.hits}/{trials} rate={est.rate:.2e} upper99={est.high:.2e} "
                   f"<= {target:.2e}; exact={est.analytic:.2e} union={mc.corrupted_union_bound:.2e}",
                   {"target": target, "monte_carlo": mc.as_dict()})


@lru_cache(maxsize=4)
def _fairness_run(transactions: int, trials: int, seed: int):
    return run(fairness_config(transactions, seed=seed, trials=trials))


def a4_fairness(transactions: int = 10_000, trials: int = 50, seed: int = 2024) -> Verdict:
    report = _fairness_run(transactions, trials, seed)
    agg = report.aggregate
    ok = agg["fairness_violations"] == 0 and agg["trials"] == trials
    return Verdict("A4", ok,
                   f"{trials} seeds x {transactions} tx: violations={agg['fairness_violations']} "
                   f"pairs={agg['fairness_pairs']} "
                   f"threshold={report.trials[0]['fairness_threshold'] if report.trials else None}",
                   {"aggregate": agg})


def a5_delayed_filter(transactions: int = 10_000, trials: int = 50, seed: int = 2024) -> Verdict:
    report = _fairness_run(transactions, trials, seed)
    bad = report.aggregate["delayed_counterexamples"]
    delayed = sum(r["kinds"].get("delayed", 0) for r in report.trials)
    return Verdict("A5", bad == 0,
                   f"counterexamples={bad} over {delayed} delayed-labelled certificates",
                   {"counterexamples": bad, "delayed_certificates": delayed})


def a6_censorship(transactions: int = 3000, seeds: int = 3, seed: int = 6) -> Verdict:
    censored = fair = 0
    rows = []
    for i in range(seeds):
        attacked = simulate(fairness_config(transactions, "leader_censor", seed=seed + i))
        clean = simulate(fairness_config(transactions, "leaderless_cr", seed=seed + i))
        censored += attacked.verdict.violation_count
        fair += clean.verdict.violation_count
        rows.append((attacked.verdict.violation_count, len(attacked.consensus.censored),
                     clean.verdict.violation_count))
    ok = censored > 0 and fair == 0
    return Verdict("A6", ok,
                   f"leader_censor violations={censored} leaderless_cr violations={fair}",
                   {"per_seed": rows})


def a7_chernoff(qs=range(6, 61)) -> Verdict:
    kl = kl_divergence(2 / 3, 1 / 3)
    worst_ratio = 0.0
    held = True
    gaps = {}
    for q in qs:
        t = math.ceil(2 * q / 3)
        exact = binomial_pass_prob(q, t, 1 / 3)
        bound = math.exp(-q * kl)
        held &= exact <= bound
        gaps[q] = (exact, bound)
        worst_ratio = max(worst_ratio, exact / bound)
    q100 = math.ceil(3 * math.log2(100))
    bound20 = chernoff_pd_bound(20, 2 / 3, 1 / 3)
    ok = held and q100 == 20 and bound20 <= 0.01
    return Verdict("A7", ok,
                   f"exact <= bound for q=6..60: {held}; worst exact/bound={worst_ratio:.3f}; "
                   f"q(n=100)={q100} bound={bound20:.5f}",
                   {"gaps": gaps, "bound_q20": bound20})


def a8_complexity(ns=(64, 128, 256, 512)) -> Verdict:
    rows = complexity_sweep(ns)
    fits = {f.mode: f for f in scaling_fit(rows)}
    exact = all(r.exact for r in rows)
    light = fits["iterative"]
    growth_ok = all(g <= lim * 1.05 for g, lim in zip(light.growth, light.growth_limit))
    ok = exact and light.r2 >= 0.99 and growth_ok
    return Verdict("A8", ok,
                   f"counting exact={exact}; iterative non-payload ~ {light.slope:.2f}"
                   f"*log2(n)*lambda R2={light.r2:.4f}; recursive R2={fits['recursive'].r2:.4f}",
                   {"rows": [r.__dict__ for r in rows],
                    "fits": {m: f.__dict__ for m, f in fits.items()}})


def _sandwich_config(hidden: bool, transactions: int, seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        params=SystemParams(n=64, f=21, q=4, t=3, k=3, delta_net=10, delta_clock=2),
        workload=WorkloadConfig(transactions=transactions, mean_gap=5.0, paths_per_tx=1,
                                hidden_fraction=1.0 if hidden else 0.0),
        adversary=AdversaryConfig(tactics=()),
        reveal=RevealConfig(decrypt_hubs=(2,)),
        seed=seed)


def sandwich_census(sim, select: Callable, limit: int) -> tuple[int, int]:
    """(victims examined, feasible traps) over traversals accepted by ``select``."""
    pool = ConstantProductPool(1_000_000.0, 1_000_000.0)
    victims = feasible = 0
    for trav in sim.traversals:
        if victims >= limit:
            break
        entry = sim.entries.get(trav.tx.id)
        if entry is None or not select(trav):
            continue
        rec = reveal(trav)
        plan = plan_sandwich(trav.tx.id, rec.adversary_knowledge_time, entry.canonical_ts,
                             sim.params, pool, victim_amount=10_000.0, front_amount=10_000.0)
        victims += 1
        feasible += plan.feasible
    return victims, feasible


def a9_lead_time(victims: int = 1000, seed: int = 9) -> Verdict:
    def shielded(trav) -> bool:
        types = hub_types(trav.path, trav.router.corrupted, trav.router.params)
        return (all(t is HubType.REGULAR for t in types[:-1])
                and types[-1] is not HubType.CORRUPTED)

    def exposed(trav) -> bool:
        return bool(trav.bad[0])

    hidden = simulate(_sandwich_config(True, 4 * victims, seed))
    seen1, traps1 = sandwich_census(hidden, shielded, victims)
    open_ = simulate(_sandwich_config(False, 2 * victims, seed))
    seen2, traps2 = sandwich_census(open_, exposed, victims)
    ok = seen1 >= victims and traps1 == 0 and traps2 > 0
    return Verdict("A9", ok,
                   f"hidden, regular prefix: {traps1}/{seen1} feasible; "
                   f"plain, corrupted node in hub 0: {traps2}/{seen2} feasible",
                   {"hidden": (seen1, traps1), "plain": (seen2, traps2)})


CRITERIA: dict[str, Callable[[], Verdict]] = {
    "A1": a1_singleton_success,
    "A2": a2_eight_paths,
    "A3": a3_corruption_bound,
    "A4": a4_fairness,
    "A5": a5_delayed_filter,
    "A6": a6_censorship,
    "A7": a7_chernoff,
    "A8": a8_complexity,
    "A9": a9_lead_time,
}


def evaluate(name: str) -> Verdict:
    started = time.perf_counter()
    verdict = CRITERIA[name]()
    verdict.seconds = time.perf_counter() - started
    return verdict


def run_all(names=None, echo: Callable[[str], None] | None = print) -> list[Verdict]:
    out = []
    for name in names or CRITERIA:
        verdict = evaluate(name)
        if echo is not None:
            echo(verdict.line())
        out.append(verdict)
    return out
