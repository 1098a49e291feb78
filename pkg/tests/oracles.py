"""Instance builders and independent reference solvers for the tests."""

import itertools
import math

import numpy as np

from irsplace.problem import IrsSite, ProblemInstance


def make_instance(beta, l_min, l_max, fixed, rate, max_irs, max_el, max_cost):
    sites = tuple(IrsSite(i, (0.0, 0.0), int(a), int(b), float(c), float(r), float(be))
                  for i, (be, a, b, c, r) in enumerate(zip(beta, l_min, l_max, fixed, rate)))
    return ProblemInstance(sites, max_irs, max_el, max_cost)


def knapsack_dp(values, weights, capacity):
    """Textbook 0/1 knapsack table over integer capacities."""
    best = [0] * (capacity + 1)
    for v, w in zip(values, weights):
        for c in range(capacity, w - 1, -1):
            best[c] = max(best[c], best[c - w] + v)
    return best[capacity]


def fractional_knapsack(values, weights, capacity):
    """Greedy by value density, the last item taken fractionally."""
    order = sorted(range(len(values)), key=lambda i: -values[i] / weights[i])
    room, total = float(capacity), 0.0
    for i in order:
        take = min(1.0, room / weights[i])
        if take <= 0:
            break
        total += take * values[i]
        room -= take * weights[i]
    return total


def brute_force(instance):
    """Plain nested loops over every (x, L); returns the best G only."""
    n = instance.n
    best = 0.0
    for x in itertools.product((0, 1), repeat=n):
        if sum(x) > instance.max_irs:
            continue
        ranges = [range(lo, hi + 1) if xi else (lo,) for xi, lo, hi in
                  zip(x, instance.l_min.tolist(), instance.l_max.tolist())]
        for L in itertools.product(*ranges):
            el = sum(xi * li for xi, li in zip(x, L))
            cost = sum(xi * (c + lam * li) for xi, c, lam, li in
                       zip(x, instance.fixed_cost, instance.cost_rate, L))
            if el <= instance.max_total_elements + 1e-9 and cost <= instance.max_total_cost + 1e-9:
                g = math.fsum(b * xi * li for b, xi, li in zip(instance.beta, x, L))
                best = min(best, g)
    return best


def candidate_count_bruteforce(instance):
    total = 0
    R = (instance.l_max - instance.l_min + 1).tolist()
    for k in range(instance.max_irs + 1):
        for subset in itertools.combinations(range(instance.n), k):
            total += int(np.prod([R[i] for i in subset])) if subset else 1
    return total
