"""Exhaustive enumeration, LP-guided greedy rounding and the greedy baselines."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LpSolution, LpStatus, lower_bound
from .problem import (
    FEAS_TOL,
    FeasibilityReport,
    ProblemInstance,
    Solution,
    check_feasibility,
    objective_G,
)

#: x-dagger entries at or below this are treated as zero
X_ZERO_TOL = 1e-9
DEFAULT_WORK_CAP = 10**8
# largest block of element arrangements materialized at once
_BLOCK = 1 << 18


@dataclass
class SolveResult:
    solution: Solution
    objective: float
    feasibility: FeasibilityReport
    algorithm: str
    meta: dict = field(default_factory=dict)

    @property
    def upper_bound(self) -> float:
        return math.exp(self.objective)


class WorkCapExceeded(RuntimeError):
    def __init__(self, candidates: int, cap: int):
        super().__init__(f"exhaustive search needs {candidates} candidates, cap is {cap}")
        self.candidates = candidates
        self.cap = cap


def _result(instance, solution, algorithm, started, **meta) -> SolveResult:
    meta["runtime_s"] = time.perf_counter() - started
    return SolveResult(solution, objective_G(instance, solution),
                       check_feasibility(instance, solution), algorithm, meta)


def round_half_up(v):
    """``floor(v + 0.5)``; halves always go up."""
    return np.floor(np.asarray(v, dtype=float) + 0.5).astype(np.int64)


def candidate_count(instance: ProblemInstance) -> int:
    """Number of (subset, arrangement) pairs with ``|I| <= M``, empty set included.

    Computed by the elementary-symmetric-polynomial recursion over R_n.
    """
    R = (instance.l_max - instance.l_min + 1).tolist()
    e = [1] + [0] * instance.max_irs
    for r in R:
        for k in range(instance.max_irs, 0, -1):
            e[k] += e[k - 1] * r
    return sum(e)


def _arrangements(lmin: np.ndarray, lmax: np.ndarray):
    """Yield blocks of element arrangements in odometer order (last index fastest)."""
    k = lmin.size
    ranges = [np.arange(a, b + 1) for a, b in zip(lmin, lmax)]
    # split into a python-iterated head and a vectorized tail
    split = k
    size = 1
    while split > 0 and size * ranges[split - 1].size <= _BLOCK:
        split -= 1
        size *= ranges[split].size
    tail = np.stack(np.meshgrid(*ranges[split:], indexing="ij"), -1).reshape(-1, k - split) \
        if split < k else np.zeros((1, 0), dtype=np.int64)
    for head in itertools.product(*ranges[:split]):
        block = np.empty((tail.shape[0], k), dtype=np.int64)
        block[:, :split] = head
        block[:, split:] = tail
        yield block


def exhaustive(instance: ProblemInstance, work_cap: int = DEFAULT_WORK_CAP) -> SolveResult:
    """Global minimum of G by plain enumeration.

    Subsets are visited by increasing size, lexicographically within a size;
    arrangements in odometer order. Exact ties keep the lexicographically
    smaller ``(x, L)``; unselected sites carry ``L_min``.
    """
    started = time.perf_counter()
    total = candidate_count(instance)
    if total > work_cap:
        raise WorkCapExceeded(total, work_cap)
    n = instance.n
    beta, c, lam = instance.beta, instance.fixed_cost, instance.cost_rate
    best = Solution.empty(instance)
    best_g = 0.0
    best_key = best.key()
    examined = 1
    for k in range(1, instance.max_irs + 1):
        for subset in itertools.combinations(range(n), k):
            idx = np.array(subset)
            fixed = c[idx].sum()
            for block in _arrangements(instance.l_min[idx], instance.l_max[idx]):
                examined += block.shape[0]
                g = block @ beta[idx]
                ok = ((block.sum(axis=1) <= instance.max_total_elements + FEAS_TOL)
                      & (fixed + block @ lam[idx] <= instance.max_total_cost + FEAS_TOL))
                if not ok.any():
                    continue
                g = np.where(ok, g, np.inf)
                j = int(np.argmin(g))
                if g[j] > best_g:
                    continue
                x = np.zeros(n, dtype=np.int64)
                x[idx] = 1
                el = instance.l_min.copy()
                el[idx] = block[j]
                cand = Solution(x, el)
                if g[j] < best_g or cand.key() < best_key:
                    best, best_g, best_key = cand, float(g[j]), cand.key()
    return _result(instance, best, "EXHAUSTIVE", started, candidates=examined)


def greedy_select(instance: ProblemInstance, order, elements) -> np.ndarray:
    """Fill sites in ``order`` until a limit breaks, then drop the last one if a budget broke.

    The loop condition checks cardinality and both budgets; the final removal
    only looks at the two budgets (cardinality cannot be exceeded by the loop).
    """
    x = np.zeros(instance.n, dtype=np.int64)
    m = 0
    l_tot = 0.0
    c_tot = 0.0
    i = None
    while (m < instance.max_irs and l_tot <= instance.max_total_elements + FEAS_TOL
           and c_tot <= instance.max_total_cost + FEAS_TOL):
        i = int(order[m])
        x[i] = 1
        l_tot += elements[i]
        c_tot += instance.fixed_cost[i] + instance.cost_rate[i] * elements[i]
        m += 1
    if (l_tot > instance.max_total_elements + FEAS_TOL
            or c_tot > instance.max_total_cost + FEAS_TOL):
        x[i] = 0
    return x


def lpr_elements(instance: ProblemInstance, lpr: LpSolution) -> np.ndarray:
    """Deterministic element counts: rounded ``z/x`` where x > 0, rounded midpoint otherwise."""
    lmin = instance.l_min.astype(float)
    lmax = instance.l_max.astype(float)
    xd, zd = lpr.x_dagger, lpr.z_dagger
    nz = xd > X_ZERO_TOL
    ratio = np.where(nz, zd / np.where(nz, xd, 1.0), 0.5 * (lmin + lmax))
    return round_half_up(np.clip(ratio, lmin, lmax))


def lpr_ga(instance: ProblemInstance, lpr: LpSolution | None = None) -> SolveResult:
    started = time.perf_counter()
    if lpr is None:
        lpr, _ = lower_bound(instance)
    if lpr.status is not LpStatus.OPTIMAL:
        raise ValueError(f"LP relaxation is {lpr.status.value}")
    elements = lpr_elements(instance, lpr)
    # stable sort on -x keeps ascending site id among ties
    order = np.argsort(-lpr.x_dagger, kind="stable")
    x = greedy_select(instance, order, elements)
    res = _result(instance, Solution.build(instance, x, elements), "LPR-GA", started)
    res.meta["lpr_lower_bound"] = lpr.g_dagger
    res.meta["gap"] = res.objective - lpr.g_dagger
    return res


def _baseline(instance: ProblemInstance, elements: np.ndarray, tag: str) -> SolveResult:
    started = time.perf_counter()
    order = np.argsort(instance.beta * elements, kind="stable")
    x = greedy_select(instance, order, elements)
    return _result(instance, Solution.build(instance, x, elements), tag, started)


def aega(instance: ProblemInstance) -> SolveResult:
    """Average-element greedy baseline: ``L = ceil((L_min + L_max) / 2)``."""
    elements = -((-(instance.l_min + instance.l_max)) // 2)
    return _baseline(instance, elements, "AEGA")


def mega(instance: ProblemInstance) -> SolveResult:
    """Maximum-element greedy baseline: ``L = L_max``."""
    return _baseline(instance, instance.l_max.copy(), "MEGA")
