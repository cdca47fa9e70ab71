"""Closed-form probabilities, bounds and complexity estimates.

Exact binomial and hypergeometric tails are summed with integer binomial
coefficients and rational weights, then divided once at the end.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

__all__ = [
    "PlanInfeasibleError", "SingletonPlan", "HubPlan", "ComplexityEstimate",
    "rho", "singleton_plan", "hub_plan", "binomial_pass_prob", "binomial_pass_prob_exact",
    "hypergeometric_pass_prob", "kl_divergence", "chernoff_pd_bound", "q_for_pd",
    "success_probability", "complexity_estimates", "default_threshold",
]


class PlanInfeasibleError(ValueError):
    pass


def _check_open_unit(name: str, x: float) -> None:
    if not 0.0 < x < 1.0:
        raise ValueError(f"{name}={x} must lie strictly inside (0, 1)")


def rho(p_h: float, p_d: float) -> float:
    """Exponent relating the two hub probabilities: p_d ** rho == p_h."""
    _check_open_unit("p_h", p_h)
    _check_open_unit("p_d", p_d)
    if p_h <= p_d:
        raise ValueError(f"need p_h > p_d, got p_h={p_h}, p_d={p_d}")
    return math.log(1.0 / p_h) / math.log(1.0 / p_d)


def success_probability(g_h: float, L: int) -> float:
    """Chance that at least one of L independent paths is regular."""
    if not 0.0 <= g_h <= 1.0:
        raise ValueError("g_h must lie in [0, 1]")
    if L < 0:
        raise ValueError("L must be non-negative")
    if L == 0:
        return 0.0
    # log1p keeps precision when g_h is tiny
    if g_h == 1.0:
        return 1.0
    return -math.expm1(L * math.log1p(-g_h))


@dataclass(frozen=True)
class SingletonPlan:
    rho: float
    tau: float
    k: int
    g_h: float
    g_d: float
    L: int
    success: float
    adversary_union_bound: float
    epsilon_target: float
    paths_per_block: int

    def as_dict(self) -> dict:
        return asdict(self)


def singleton_plan(n: int, c: float, p_h: float = 2 / 3, p_d: float = 1 / 3,
                   paths_per_block: int | None = None) -> SingletonPlan:
    """Path length and retry count for hubs made of a single node.

    k is rounded up, which keeps the all-corrupted path probability at or
    below n**-tau; L is rounded down.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if c < 1:
        raise ValueError("c must be at least 1")
    r = rho(p_h, p_d)
    tau = c + 1.0
    k = math.ceil(tau * math.log(n) / math.log(1.0 / p_d))
    g_h = p_h**k
    g_d = p_d**k
    L = math.floor(n ** (r * tau))
    budget = n if paths_per_block is None else paths_per_block
    if L > budget:
        raise PlanInfeasibleError(f"L={L} exceeds the {budget} admissible paths")
    return SingletonPlan(
        rho=r, tau=tau, k=k, g_h=g_h, g_d=g_d, L=L,
        success=success_probability(g_h, L),
        adversary_union_bound=budget * g_d,
        epsilon_target=float(n) ** (-c),
        paths_per_block=budget,
    )


def _as_fraction(p) -> Fraction:
    # floats convert to their exact binary value
    return Fraction(p)


def binomial_pass_prob_exact(q: int, t: int, p) -> Fraction:
    """P(Bin(q, p) >= t) as an exact rational."""
    if not 0 <= t <= q:
        raise ValueError(f"need 0 <= t <= q, got t={t}, q={q}")
    pf = _as_fraction(p)
    if not 0 <= pf <= 1:
        raise ValueError("p must lie in [0, 1]")
    num, den = pf.numerator, pf.denominator
    total = 0
    for i in range(t, q + 1):
        total += math.comb(q, i) * num**i * (den - num) ** (q - i)
    return Fraction(total, den**q)


def binomial_pass_prob(q: int, t: int, p) -> float:
    if t < 1:
        raise ValueError("t must be at least 1")
    return float(binomial_pass_prob_exact(q, t, p))


def hypergeometric_pass_prob(n: int, marked: int, q: int, t: int) -> float:
    """P(at least t marked among q distinct draws from n items with `marked` marked)."""
    if not (0 <= marked <= n and 1 <= q <= n):
        raise ValueError("invalid hypergeometric parameters")
    total = 0
    for i in range(max(t, 0), min(q, marked) + 1):
        total += math.comb(marked, i) * math.comb(n - marked, q - i)
    return float(Fraction(total, math.comb(n, q)))


def kl_divergence(a: float, p: float) -> float:
    """Bernoulli Kullback-Leibler divergence D(a || p) in nats."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"a={a} must lie in [0, 1]")
    _check_open_unit("p", p)
    # 0 * log 0 is taken as 0
    head = a * math.log(a / p) if a > 0 else 0.0
    tail = (1 - a) * math.log((1 - a) / (1 - p)) if a < 1 else 0.0
    return head + tail


def chernoff_pd_bound(q: int, t_fraction: float, p: float) -> float:
    """Chernoff upper bound on P(Bin(q, p) >= t_fraction * q)."""
    if q < 0:
        raise ValueError("q must be non-negative")
    if t_fraction <= p:
        raise ValueError("bound needs t_fraction > p")
    if q == 0:
        return 1.0
    return math.exp(-q * kl_divergence(t_fraction, p))


def q_for_pd(target: float, t_fraction: float = 2 / 3, p: float = 1 / 3) -> int:
    """Smallest hub size whose Chernoff bound is at most `target`."""
    _check_open_unit("target", target)
    return math.ceil(math.log(1.0 / target) / kl_divergence(t_fraction, p))


def default_threshold(q: int) -> int:
    return math.ceil(2 * q / 3)


@dataclass(frozen=True)
class HubPlan:
    q: int
    t: int
    k: int
    p_h_exact: float
    p_d_exact: float
    p_d_chernoff: float
    g_h: float
    g_d: float
    L: int
    success: float
    epsilon_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def hub_plan(n: int, q: int, k: int, t: int | None = None, *, p: float = 1 / 3,
             target_success: float = 0.9, paths_per_block: int | None = None,
             L: int | None = None) -> HubPlan:
    """Evaluate a non-singleton design and pick the smallest L meeting target_success.

    p is the corrupted fraction; hub members are modelled as independent draws.
    """
    if t is None:
        t = default_threshold(q)
    p_h = binomial_pass_prob(q, t, 1 - _as_fraction(p))
    p_d = binomial_pass_prob(q, t, p)
    tf = t / q
    p_d_bound = chernoff_pd_bound(q, tf, p) if tf > p else 1.0
    g_h, g_d = p_h**k, p_d**k
    budget = n if paths_per_block is None else paths_per_block
    if L is None:
        if g_h <= 0.0:
            raise PlanInfeasibleError("regular paths are impossible with these parameters")
        if g_h >= 1.0:
            L = 1
        else:
            L = max(1, math.ceil(math.log1p(-target_success) / math.log1p(-g_h)))
    if L > budget:
        raise PlanInfeasibleError(f"L={L} exceeds the {budget} admissible paths")
    return HubPlan(q=q, t=t, k=k, p_h_exact=p_h, p_d_exact=p_d, p_d_chernoff=p_d_bound,
                   g_h=g_h, g_d=g_d, L=L, success=success_probability(g_h, L),
                   epsilon_bound=budget * g_d)


@dataclass(frozen=True)
class ComplexityEstimate:
    protocol: str
    submission_per_tx: float
    total: float


def complexity_estimates(n: int, T: int, L: float, lam: float, c: float,
                         log_base: float = 2.0) -> list[ComplexityEstimate]:
    """Evaluate each comparison-table row with unit constants.

    The log term is floored at 1 so that degenerate sizes stay on the L scale.
    """
    if min(n, T, L, lam, c) <= 0:
        raise ValueError("all arguments must be positive")
    lg = max(math.log(n, log_base), 1.0)
    rows = [
        ("Themis", n * L, n * T * L + n**2 * T * lam),
        ("Quick o.-f.", n**2 * L + n**3 * lam, n**2 * T * L + n**3 * T * lam),
        ("Pompe", n * L + n**2 * lam, n * T * L + n**2 * T * lam + n * lam),
        ("hubs-speed", c * lg**2 * L, c * lg**2 * T * L + n**2 * lam),
        ("hubs-light", c * lg * lam + L, (c * lg * lam + L) * T + lg * n * lam),
    ]
    return [ComplexityEstimate(name, float(sub), float(tot)) for name, sub, tot in rows]
