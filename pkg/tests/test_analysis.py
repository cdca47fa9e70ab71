import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pathfair.analysis import (PlanInfeasibleError, binomial_pass_prob,
                               binomial_pass_prob_exact, chernoff_pd_bound,
                               complexity_estimates, hub_plan, hypergeometric_pass_prob,
                               kl_divergence, q_for_pd, rho, singleton_plan,
                               success_probability)


def test_rho_values():
    assert rho(2 / 3, 1 / 3) == pytest.approx(0.3690, abs=5e-4)
    assert rho(0.9, 0.1) == pytest.approx(math.log(1 / 0.9) / math.log(10), rel=1e-12)
    assert rho(0.9, 0.1) == pytest.approx(0.04576, abs=1e-5)
    with pytest.raises(ValueError):
        rho(0.5, 0.5)


def test_singleton_plan_headline():
    plan = singleton_plan(200, 1.2)
    assert plan.k == 11
    assert plan.L == 73
    assert 0.566 <= plan.success <= 0.586
    assert plan.adversary_union_bound == pytest.approx(200 * 3.0**-11, rel=1e-12)
    assert plan.adversary_union_bound <= 200**-1.2
    assert plan.epsilon_target == pytest.approx(1.7328e-3, rel=1e-3)


@given(st.integers(10, 5000), st.floats(1.0, 3.0))
def test_singleton_identity(n, c):
    try:
        plan = singleton_plan(n, c, paths_per_block=10**12)
    except PlanInfeasibleError:
        return
    assert plan.g_d ** plan.rho == pytest.approx(plan.g_h, rel=1e-9)
    # g_h by repeated multiplication
    prod = 1.0
    for _ in range(plan.k):
        prod *= 2 / 3
    assert plan.g_h == pytest.approx(prod, rel=1e-12)


def _binomial_oracle(q, t, p):
    # independent route: complement of the lower tail with Fraction arithmetic
    p = Fraction(p)
    low = sum(math.comb(q, i) * p**i * (1 - p) ** (q - i) for i in range(t))
    return 1 - low


@pytest.mark.parametrize("q,t,p,expected,tol", [
    (6, 4, Fraction(2, 3), 496 / 729, 1e-15),
    (6, 4, Fraction(1, 3), 0.1001, 1e-4),
    (12, 8, Fraction(1, 3), 0.0188, 1e-4),
])
def test_binomial_pass_prob_values(q, t, p, expected, tol):
    assert binomial_pass_prob(q, t, p) == pytest.approx(expected, abs=tol)


def test_binomial_exact_is_rational():
    assert binomial_pass_prob_exact(6, 4, Fraction(2, 3)) == Fraction(496, 729)
    assert binomial_pass_prob(1, 1, 0.3) == pytest.approx(0.3, abs=1e-15)


@given(st.integers(1, 30), st.data(), st.fractions(0, 1, max_denominator=50))
def test_binomial_tails_sum_to_one(q, data, p):
    t = data.draw(st.integers(1, q))
    assert binomial_pass_prob_exact(q, t, p) == _binomial_oracle(q, t, p)


@given(st.integers(1, 60), st.data())
def test_chernoff_dominates_exact(q, data):
    t = data.draw(st.integers(1, q))
    if t / q <= 1 / 3:
        return
    assert binomial_pass_prob(q, t, Fraction(1, 3)) <= chernoff_pd_bound(q, t / q, 1 / 3) + 1e-15


def test_kl_and_chernoff_values():
    assert kl_divergence(2 / 3, 1 / 3) == pytest.approx(math.log(2) / 3, rel=1e-12)
    assert kl_divergence(0.3, 0.3) == 0.0
    assert kl_divergence(0.5, 0.25) == pytest.approx(0.1438, abs=1e-4)
    assert chernoff_pd_bound(12, 2 / 3, 1 / 3) == pytest.approx(0.0625, rel=1e-12)
    assert chernoff_pd_bound(0, 2 / 3, 1 / 3) == 1.0
    assert q_for_pd(0.01) == 20


def test_success_probability_values():
    assert success_probability(0.25, 8) == pytest.approx(0.89989, abs=1e-5)
    assert success_probability(0.3, 0) == 0.0
    assert success_probability(1.0, 1) == 1.0


@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 200), st.integers(0, 200))
def test_success_probability_monotone(g1, g2, l1, l2):
    lo_g, hi_g = sorted((g1, g2))
    lo_l, hi_l = sorted((l1, l2))
    assert success_probability(lo_g, lo_l) <= success_probability(hi_g, hi_l) + 1e-15


def test_hypergeometric_matches_enumeration():
    # n=9 small enough to enumerate all 3-subsets
    import itertools
    marked = set(range(4))
    subsets = list(itertools.combinations(range(9), 3))
    hits = sum(1 for s in subsets if len(marked & set(s)) >= 2)
    assert hypergeometric_pass_prob(9, 4, 3, 2) == pytest.approx(hits / len(subsets), rel=1e-15)


def test_hub_plan_eight_paths():
    plan = hub_plan(180, 18, 2, 12, L=8)
    assert plan.L == 8
    assert plan.p_h_exact == pytest.approx(binomial_pass_prob(18, 12, Fraction(2, 3)))
    assert plan.success == pytest.approx(success_probability(plan.p_h_exact**2, 8))
    auto = hub_plan(180, 18, 2, 12, target_success=0.9)
    assert auto.success >= 0.9 and auto.L == 5


def test_complexity_rows():
    rows = {r.protocol: r for r in complexity_estimates(256, 10, 250, 32, 2)}
    assert rows["hubs-light"].submission_per_tx == 762
    assert complexity_estimates(64, 1, 1000, 32, 1)[0].submission_per_tx == 64000
    tiny = complexity_estimates(1, 1, 250, 32, 1)
    assert {r.protocol: r.submission_per_tx for r in tiny}["hubs-speed"] == 250
