"""Self-check suites: each returns a JSON-ready report with one entry per check.

Default sizes (``trials`` overrides the first one listed):

* ``oracle``      200 random small instances, exhaustive vs LP bound vs greedy
* ``guarantees``  100 000 rounding draws on one default-sized scenario
* ``bounds``      20 (instance, solution) pairs, L in {1, 2, 5, 10}, 100 000 fades each
* ``crossover``   closed form vs root bracketing, no randomness
"""

from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from ._seeding import mix_seed, substream
from .channel import LinkBudget, RayleighProduct, fade_cdf, threshold_argument
from .lp import lower_bound
from .mcsim import find_li_crossover_dbm, li_crossover_dbm, site_outage_indicators, \
    validate_bound
from .problem import IrsSite, ProblemInstance, ScenarioConfig, Solution, generate_scenario
from .randomized import deviation_events, guarantees as guarantee_bundle, \
    rounding_statistics, sample_rounding
from .solvers import aega, exhaustive, lpr_ga, mega

SUITES = ("oracle", "guarantees", "bounds", "crossover")
DEFAULTS = {"oracle": 200, "guarantees": 100_000, "bounds": 100_000, "crossover": 0}
LP_TOL = 1e-7
CROSSOVER_TARGET_DBM = -70.49
CROSSOVER_TOL_DB = 0.2


def random_small_instance(rng: np.random.Generator, n_max: int = 6,
                          width_max: int = 4) -> ProblemInstance:
    """Small instance whose budgets bind about half the time."""
    n = int(rng.integers(1, n_max + 1))
    sites = []
    for i in range(n):
        lo = int(rng.integers(1, 8))
        hi = lo + int(rng.integers(0, width_max))
        sites.append(IrsSite(i, (0.0, 0.0), lo, hi, float(rng.uniform(0.5, 5.0)),
                             float(rng.uniform(0.05, 0.5)), float(-rng.exponential(0.3))))
    lmax_sum = sum(s.l_max for s in sites)
    cost_max = sum(s.fixed_cost + s.cost_rate * s.l_max for s in sites)
    return ProblemInstance(tuple(sites), int(rng.integers(1, n + 1)),
                           float(rng.uniform(0.3, 1.0) * lmax_sum),
                           float(rng.uniform(0.3, 1.0) * cost_max))


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def suite_oracle(count: int, seed: int) -> list[dict]:
    checks = []
    for k in range(count):
        inst = random_small_instance(substream(seed, k))
        _, g_lp = lower_bound(inst)
        best = exhaustive(inst)
        ok = g_lp <= best.objective + LP_TOL
        worst = {}
        for res in (lpr_ga(inst), aega(inst), mega(inst)):
            ok &= res.feasibility.feasible and best.objective <= res.objective
            worst[res.algorithm] = res.objective
        checks.append(_check(f"instance {k}", ok, g_lp=g_lp, g_opt=best.objective, **worst))
    return checks


def _mean_check(name, sample, expected):
    mean = float(sample.mean())
    se = float(sample.std(ddof=1) / math.sqrt(sample.size))
    # zero-variance quantities are compared up to float noise
    allowed = 4.0 * se + 1e-9 * max(1.0, abs(expected))
    return _check(name, abs(mean - expected) <= allowed, mean=mean, expected=expected,
                  stderr=se)


def suite_guarantees(trials: int, seed: int) -> list[dict]:
    inst = generate_scenario(ScenarioConfig(), mix_seed(seed, 0))
    lpr, g_lp = lower_bound(inst)
    bundle = guarantee_bundle(inst, lpr)
    X, L = sample_rounding(inst, lpr, trials, substream(seed, 1))
    stats = rounding_statistics(inst, X, L)
    checks = [
        _mean_check("mean objective", stats["objective"], bundle.expected_objective),
        _mean_check("mean cardinality", stats["cardinality"], bundle.expected_cardinality),
        _mean_check("mean total elements", stats["total_elements"],
                    bundle.expected_total_elements),
        _mean_check("mean total cost", stats["total_cost"], bundle.expected_total_cost),
    ]
    events = deviation_events(inst, bundle, stats, g_lp)
    floors = {"E0": bundle.xi, "E1": bundle.xi, "E2": bundle.xi, "E3": bundle.xi,
              "E123": bundle.xi_prime, "E0123": bundle.xi_double_prime}
    for key, xi in floors.items():
        freq = float(events[key].mean())
        checks.append(_check(f"Pr({key})", freq >= 1.0 - xi, frequency=freq, floor=1.0 - xi))
    return checks


def bound_pairs(count: int, seed: int):
    """Random (instance, installed site set) pairs on 1..10-element scenarios."""
    cfg = ScenarioConfig(n_sites=8, max_irs=3, l_min=1, l_max=10, max_total_elements=30,
                         max_total_cost=100)
    for k in range(count):
        inst = generate_scenario(cfg, mix_seed(seed, 2, k))
        rng = substream(seed, 3, k)
        size = int(rng.integers(1, cfg.max_irs + 1))
        chosen = np.sort(rng.choice(inst.n, size=size, replace=False))
        yield cfg.budget, inst, chosen


def suite_bounds(trials: int, seed: int, pairs: int = 20,
                 sizes: tuple[int, ...] = (1, 2, 5, 10)) -> list[dict]:
    checks = []
    dist = RayleighProduct()
    for k, (budget, inst, chosen) in enumerate(bound_pairs(pairs, seed)):
        for el in sizes:
            x = np.zeros(inst.n, dtype=np.int64)
            x[chosen] = 1
            sol = Solution(x, np.where(x == 1, el, inst.l_min))
            rep = validate_bound(inst, sol, budget, trials, mix_seed(seed, 4, k, el), dist)
            detail = {"p_hat": rep.estimate.p_hat, "bound": rep.bound,
                      "violations": rep.violations}
            ok = rep.holds
            if el == 1:
                # a single element: the per-site bound is the exact outage
                gaps = [abs(s.p_hat - s.bound) - 4.0 * math.sqrt(s.bound * (1 - s.bound)
                                                                 / trials)
                        for s in rep.per_site]
                ok &= max(gaps) <= 0.0
                detail["tightness_excess"] = max(gaps)
            checks.append(_check(f"pair {k} L={el}", ok, **detail))
    return checks


def suite_crossover(budget: LinkBudget | None = None) -> list[dict]:
    if budget is None:
        budget = LinkBudget.from_db(25.0, -80.0, -70.0, 9.0)
    closed = li_crossover_dbm(budget)
    bracketed = find_li_crossover_dbm(budget, delta_n=1e-9)
    return [
        _check("closed form", abs(closed - CROSSOVER_TARGET_DBM) <= CROSSOVER_TOL_DB,
               crossover_dbm=closed),
        _check("root bracketing agrees", abs(closed - bracketed) <= 1e-6,
               crossover_dbm=bracketed),
    ]


def run_suite(suite: str, trials: int | None = None, seed: int = 0) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    n = DEFAULTS[suite] if trials is None else trials
    started = time.perf_counter()
    if suite == "oracle":
        checks = suite_oracle(n, seed)
    elif suite == "guarantees":
        checks = suite_guarantees(n, seed)
    elif suite == "bounds":
        checks = suite_bounds(n, seed)
    else:
        checks = suite_crossover()
    failed = [c["name"] for c in checks if not c["passed"]]
    return {"suite": suite, "trials": n, "seed": seed, "passed": not failed,
            "checks": len(checks), "failed": failed, "details": checks,
            "elapsed_s": time.perf_counter() - started}
