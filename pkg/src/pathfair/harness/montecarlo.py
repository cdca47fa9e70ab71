"""Monte Carlo estimates of path-corruption events over random block seeds.

Each trial draws a fresh 32-byte block seed and a fresh corruption mask with
exactly ``f`` corrupted nodes, then asks two questions of the hashed topology:

* does any of the block's paths consist only of Corrupted hubs?
* does a client trying ``client_paths`` distinct random paths find a Regular one?

Hub members are distinct draws, so given the mask each hub's type follows a
hypergeometric law and different hubs are independent. That gives exact
analytic counterparts to compare against.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .. import kernels
from ..analysis import success_probability
from ..core import SystemParams
from .stats import wilson_interval


@dataclass(frozen=True)
class Estimate:
    hits: int
    trials: int
    rate: float
    low: float
    high: float
    analytic: float

    @property
    def covers_analytic(self) -> bool:
        return self.low <= self.analytic <= self.high


@dataclass(frozen=True)
class CorruptionReport:
    params: dict
    client_paths: int
    paths_checked: int
    corrupted: Estimate
    regular: Estimate
    corrupted_union_bound: float
    backend: str

    def as_dict(self) -> dict:
        out = asdict(self)
        for name in ("corrupted", "regular"):
            out[name]["covers_analytic"] = getattr(self, name).covers_analytic
        return out


def hub_probabilities(params: SystemParams) -> tuple[float, float]:
    """(P[hub Regular], P[hub Corrupted]) for one hub, given exactly f corrupted nodes."""
    n, f, q, t = params.n, params.f, params.q, params.t
    regular = corrupted = 0
    for bad in range(max(0, q - (n - f)), min(q, f) + 1):
        ways = math.comb(f, bad) * math.comb(n - f, q - bad)
        good = q - bad
        if good >= t and bad < t:
            regular += ways
        elif bad >= t and good < t:
            corrupted += ways
    total = math.comb(n, q)
    return float(Fraction(regular, total)), float(Fraction(corrupted, total))


def analytic_rates(params: SystemParams, client_paths: int,
                   paths: int | None = None) -> tuple[float, float, float]:
    """(P[some all-Corrupted path], P[client finds Regular], union bound on the former)."""
    paths = params.paths_per_block if paths is None else paths
    g_h, g_d = hub_probabilities(params)
    path_bad = g_d ** params.k
    corrupted = -np.expm1(paths * np.log1p(-path_bad)) if path_bad < 1 else 1.0
    regular = success_probability(g_h ** params.k, client_paths)
    return float(corrupted), float(regular), min(1.0, paths * path_bad)


def _batch_inputs(rng: np.random.Generator, size: int, n: int, f: int):
    seeds = rng.integers(0, 2**32, size=(size, 8), dtype=np.uint64).astype(np.uint32)
    blocks = rng.integers(0, 2**40, size=size, dtype=np.int64)
    order = np.argsort(rng.random((size, n)), axis=1)
    corrupt = np.zeros((size, n), dtype=np.bool_)
    np.put_along_axis(corrupt, order[:, :f], True, axis=1)
    return seeds, blocks, corrupt


def monte_carlo_corruption(params: SystemParams, trials: int, client_paths: int | None = None,
                           *, seed: int = 0, batch: int = 10_000, paths: int | None = None,
                           confidence: float = 0.99, backend=None) -> CorruptionReport:
    """Empirical corruption and success rates with Wilson intervals beside the exact values.

    ``paths`` limits how many path ids of each block are scanned for an
    all-Corrupted path (default: the whole block). ``backend`` overrides the
    active kernel module.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if batch < 1:
        raise ValueError("batch must be positive")
    kern = backend or kernels.active
    n, f, q, t, k = params.n, params.f, params.q, params.t, params.k
    paths = params.paths_per_block if paths is None else paths
    client_paths = paths if client_paths is None else client_paths
    if not 0 <= client_paths <= params.paths_per_block:
        raise ValueError("client_paths must fit in the block's path budget")
    bad_hits = good_hits = 0
    done = 0
    number = 0
    while done < trials:
        size = min(batch, trials - done)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(number,))))
        seeds, blocks, corrupt = _batch_inputs(rng, size, n, f)
        if client_paths:
            choices = np.argsort(rng.random((size, params.paths_per_block)), axis=1)
            choices = np.ascontiguousarray(choices[:, :client_paths]).astype(np.int64)
        else:
            choices = np.zeros((size, 0), dtype=np.int64)
        if f:
            bad_hits += int(kern.any_corrupted_path(seeds, blocks, corrupt, n, q, t, k, paths).sum())
        good_hits += int(kern.any_regular_choice(seeds, blocks, corrupt, choices, n, q, t, k).sum())
        done += size
        number += 1

    corrupted_p, regular_p, union = analytic_rates(params, client_paths, paths)

    def estimate(hits: int, analytic: float) -> Estimate:
        low, high = wilson_interval(hits, trials, confidence)
        return Estimate(hits, trials, hits / trials, low, high, analytic)

    return CorruptionReport(
        params=asdict(params), client_paths=client_paths, paths_checked=paths,
        corrupted=estimate(bad_hits, corrupted_p), regular=estimate(good_hits, regular_p),
        corrupted_union_bound=union,
        backend="numba" if kern is kernels.numba_backend else "numpy")
