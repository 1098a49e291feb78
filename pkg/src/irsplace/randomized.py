"""Randomized rounding of the LP relaxation and its probabilistic guarantees."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._seeding import substream
from .lp import LpSolution, LpStatus
from .problem import (
    FeasibilityReport,
    ProblemInstance,
    Solution,
    check_feasibility,
    objective_G,
)
from .solvers import X_ZERO_TOL, SolveResult


@dataclass(frozen=True)
class TrialOutcome:
    candidate: Solution
    feasibility: FeasibilityReport
    objective: float
    trial_index: int


@dataclass
class FailureAfterTMax:
    """No feasible rounding within ``t_max`` trials; carries every attempt."""

    t_max: int
    trials: list[TrialOutcome] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return False


@dataclass(frozen=True)
class GuaranteeBundle:
    delta: tuple[float, float, float, float]
    epsilon: tuple[float, float, float, float]
    xi: float
    xi_prime: float
    xi_double_prime: float
    expected_objective: float
    expected_cardinality: float
    expected_total_elements: float
    expected_total_cost: float

    def to_dict(self) -> dict:
        return {
            "delta": list(self.delta),
            "epsilon": list(self.epsilon),
            "xi": self.xi,
            "xi_prime": self.xi_prime,
            "xi_double_prime": self.xi_double_prime,
            "expected_objective": self.expected_objective,
            "expected_cardinality": self.expected_cardinality,
            "expected_total_elements": self.expected_total_elements,
            "expected_total_cost": self.expected_total_cost,
        }


class DegenerateInstanceError(ValueError):
    pass


def _rounding_params(instance: ProblemInstance, lpr: LpSolution):
    if lpr.status is not LpStatus.OPTIMAL:
        raise ValueError(f"LP relaxation is {lpr.status.value}")
    lmin = instance.l_min.astype(float)
    lmax = instance.l_max.astype(float)
    xd = np.clip(lpr.x_dagger, 0.0, 1.0)
    nz = xd > X_ZERO_TOL
    ldag = np.clip(np.where(nz, lpr.z_dagger / np.where(nz, xd, 1.0), lmin), lmin, lmax)
    floor = np.floor(ldag)
    frac = ldag - floor
    return xd, nz, floor.astype(np.int64), frac


def sample_rounding(instance: ProblemInstance, lpr: LpSolution, trials: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``trials`` independent roundings at once; returns ``(X, L)`` of shape (trials, N).

    Each trial consumes three uniforms per site, in the same layout as
    :func:`lpr_ra_round`, so one trial here equals one call there on the
    same generator state.
    """
    xd, nz, floor, frac = _rounding_params(instance, lpr)
    u = rng.random((trials, instance.n, 3))
    X = (u[:, :, 0] < xd).astype(np.int64)
    up = (u[:, :, 1] < frac).astype(np.int64)
    span = instance.l_max - instance.l_min + 1
    uniform_pick = instance.l_min + np.minimum((u[:, :, 2] * span).astype(np.int64), span - 1)
    L = np.where(nz, floor + up, uniform_pick)
    return X, L


def lpr_ra_round(instance: ProblemInstance, lpr: LpSolution, rng: np.random.Generator,
                 trial_index: int = 0) -> TrialOutcome:
    X, L = sample_rounding(instance, lpr, 1, rng)
    cand = Solution.build(instance, X[0], L[0])
    return TrialOutcome(cand, check_feasibility(instance, cand), objective_G(instance, cand),
                        trial_index)


def lpr_ra(instance: ProblemInstance, lpr: LpSolution, t_max: int,
           seed: int) -> SolveResult | FailureAfterTMax:
    """Repeat independent roundings until one is feasible or ``t_max`` is spent.

    Trial ``t`` draws from the substream ``(seed, t)``, so the outcome of a
    trial does not depend on how many trials ran before it.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    started = time.perf_counter()
    failures = FailureAfterTMax(t_max)
    for t in range(t_max):
        out = lpr_ra_round(instance, lpr, substream(seed, t), trial_index=t)
        if out.feasibility.feasible:
            return SolveResult(out.candidate, out.objective, out.feasibility, "LPR-RA",
                               {"trial_index": t,
                                "runtime_s": time.perf_counter() - started})
        failures.trials.append(out)
    return failures


def guarantees(instance: ProblemInstance, lpr: LpSolution) -> GuaranteeBundle:
    n = instance.n
    lmax = instance.l_max.astype(float)
    d0 = float(np.sum((instance.beta * lmax) ** 2))
    d1 = float(n)
    d2 = float(np.sum(lmax ** 2))
    d3 = float(np.sum((instance.fixed_cost + instance.cost_rate * lmax) ** 2))
    zero = [k for k, d in zip((0, 2, 3), (d0, d2, d3)) if d <= 0]
    if zero:
        raise DegenerateInstanceError(f"Delta_k vanishes for k in {zero}")
    log_term = math.log(n + 1)
    deltas = (d0, d1, d2, d3)
    eps = tuple(math.sqrt(d * log_term) for d in deltas)
    xi = (n + 1) ** -2
    return GuaranteeBundle(
        deltas, eps, xi, 3 * xi, 4 * xi,
        expected_objective=float(instance.beta @ lpr.z_dagger),
        expected_cardinality=float(lpr.x_dagger.sum()),
        expected_total_elements=float(lpr.z_dagger.sum()),
        expected_total_cost=float(instance.fixed_cost @ lpr.x_dagger
                                  + instance.cost_rate @ lpr.z_dagger),
    )


def rounding_statistics(instance: ProblemInstance, X: np.ndarray, L: np.ndarray) -> dict:
    """Per-trial objective, cardinality, total elements and total cost."""
    Z = X * L
    return {
        "objective": Z @ instance.beta,
        "cardinality": X.sum(axis=1),
        "total_elements": Z.sum(axis=1),
        "total_cost": X @ instance.fixed_cost + Z @ instance.cost_rate,
    }


def deviation_events(instance: ProblemInstance, bundle: GuaranteeBundle, stats: dict,
                     reference_objective: float) -> dict:
    """Indicator arrays for the four deviation events and their intersections.

    ``reference_objective`` replaces the unknown global minimum in the
    objective event; passing the LP bound gives a subset of the true event.
    """
    e0 = stats["objective"] <= reference_objective + bundle.epsilon[0]
    e1 = stats["cardinality"] <= instance.max_irs + bundle.epsilon[1]
    e2 = stats["total_elements"] <= instance.max_total_elements + bundle.epsilon[2]
    e3 = stats["total_cost"] <= instance.max_total_cost + bundle.epsilon[3]
    return {"E0": e0, "E1": e1, "E2": e2, "E3": e3,
            "E123": e1 & e2 & e3, "E0123": e0 & e1 & e2 & e3}


def multi_trial_success_bound(xi_prime: float, t: int) -> float:
    if not 0 < xi_prime <= 0.75:
        raise ValueError("xi_prime must lie in (0, 3/4]")
    if t < 1:
        raise ValueError("t must be >= 1")
    return 1.0 - xi_prime ** t


def hoeffding_tail(delta: float, u: float) -> float:
    """Bound on ``Pr(X - E[X] > u)`` for a sum with squared-range total ``delta``."""
    if not (delta > 0 and u > 0):
        raise ValueError("delta and u must be positive")
    return math.exp(-2.0 * u * u / delta)
