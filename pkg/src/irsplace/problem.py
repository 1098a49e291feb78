"""Problem instances, objective/feasibility evaluation and scenario generation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .channel import (
    FadeDistribution,
    LinkBudget,
    PathLossParams,
    RayleighProduct,
    beta_coeff,
    effective_gain,
    path_loss,
)

#: absolute slack used for every budget comparison
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class IrsSite:
    id: int
    position: tuple[float, ...]
    l_min: int
    l_max: int
    fixed_cost: float
    cost_rate: float
    beta: float
    rho: float | None = None

    def __post_init__(self):
        if not 0 <= self.l_min <= self.l_max:
            raise ValueError(f"site {self.id}: need 0 <= l_min <= l_max")
        if self.fixed_cost < 0 or self.cost_rate < 0:
            raise ValueError(f"site {self.id}: costs must be nonnegative")
        if self.beta > 0:
            raise ValueError(f"site {self.id}: beta must be <= 0")


@dataclass(frozen=True)
class ProblemInstance:
    sites: tuple[IrsSite, ...]
    max_irs: int
    max_total_elements: float
    max_total_cost: float

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        if [s.id for s in self.sites] != list(range(len(self.sites))):
            raise ValueError("site ids must be 0..N-1 in order")
        if not 0 <= self.max_irs <= len(self.sites):
            raise ValueError("max_irs must lie in [0, N]")
        if self.max_total_elements < 0 or self.max_total_cost < 0:
            raise ValueError("budgets must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def beta(self) -> np.ndarray:
        return np.array([s.beta for s in self.sites], dtype=float)

    @cached_property
    def l_min(self) -> np.ndarray:
        return np.array([s.l_min for s in self.sites], dtype=np.int64)

    @cached_property
    def l_max(self) -> np.ndarray:
        return np.array([s.l_max for s in self.sites], dtype=np.int64)

    @cached_property
    def fixed_cost(self) -> np.ndarray:
        return np.array([s.fixed_cost for s in self.sites], dtype=float)

    @cached_property
    def cost_rate(self) -> np.ndarray:
        return np.array([s.cost_rate for s in self.sites], dtype=float)

    @cached_property
    def rho(self) -> np.ndarray:
        return np.array([np.nan if s.rho is None else s.rho for s in self.sites])

    def to_dict(self) -> dict:
        return {
            "max_irs": self.max_irs,
            "max_total_elements": self.max_total_elements,
            "max_total_cost": self.max_total_cost,
            "sites": [
                {
                    "id": s.id,
                    "position": list(s.position),
                    "l_min": s.l_min,
                    "l_max": s.l_max,
                    "fixed_cost": s.fixed_cost,
                    "cost_rate": s.cost_rate,
                    "beta": s.beta,
                    "rho": s.rho,
                }
                for s in self.sites
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemInstance":
        sites = tuple(
            IrsSite(
                id=int(s["id"]),
                position=tuple(float(v) for v in s.get("position", ())),
                l_min=int(s["l_min"]),
                l_max=int(s["l_max"]),
                fixed_cost=float(s["fixed_cost"]),
                cost_rate=float(s["cost_rate"]),
                beta=float(s["beta"]),
                rho=None if s.get("rho") is None else float(s["rho"]),
            )
            for s in doc["sites"]
        )
        return cls(sites, int(doc["max_irs"]), doc["max_total_elements"],
                   doc["max_total_cost"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class Solution:
    """Installation vector ``x`` and element counts ``elements``.

    Use :meth:`build` to get bound checking against an instance; out-of-range
    counts are rejected, never clamped.
    """

    x: np.ndarray
    elements: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64)
        el = np.asarray(self.elements, dtype=np.int64)
        if x.shape != el.shape or x.ndim != 1:
            raise ValueError("x and elements must be 1-D with equal length")
        if np.any((x != 0) & (x != 1)):
            raise ValueError("x must be binary")
        if not np.array_equal(el, np.asarray(self.elements)):
            raise ValueError("element counts must be integers")
        x.setflags(write=False)
        el.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "elements", el)

    @classmethod
    def build(cls, instance: ProblemInstance, x, elements) -> "Solution":
        sol = cls(x, elements)
        if sol.x.shape != (instance.n,):
            raise ValueError(f"expected length {instance.n}, got {sol.x.shape}")
        bad = np.flatnonzero((sol.elements < instance.l_min) | (sol.elements > instance.l_max))
        if bad.size:
            raise ValueError(f"element counts out of bounds at sites {bad.tolist()}")
        return sol

    @classmethod
    def empty(cls, instance: ProblemInstance) -> "Solution":
        return cls.build(instance, np.zeros(instance.n, dtype=np.int64), instance.l_min)

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.elements, other.elements)

    def __hash__(self):
        return hash((self.x.tobytes(), self.elements.tobytes()))

    def key(self) -> tuple:
        return tuple(self.x.tolist()), tuple(self.elements.tolist())


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    cardinality: int
    total_elements: int
    total_cost: float
    violated: tuple[str, ...] = ()


def _check_dims(instance: ProblemInstance, solution: Solution):
    if solution.x.shape != (instance.n,):
        raise ValueError(f"solution length {solution.x.size} != N={instance.n}")


def objective_G(instance: ProblemInstance, solution: Solution) -> float:
    """Log of the system outage upper bound, ``sum beta_n x_n L_n``."""
    _check_dims(instance, solution)
    return float(np.dot(instance.beta, solution.x * solution.elements))


def check_feasibility(instance: ProblemInstance, solution: Solution) -> FeasibilityReport:
    _check_dims(instance, solution)
    x, el = solution.x, solution.elements
    card = int(x.sum())
    tot_el = int(np.dot(x, el))
    tot_cost = float(np.dot(x, instance.fixed_cost) + np.dot(x * el, instance.cost_rate))
    violated = []
    if card > instance.max_irs:
        violated.append("cardinality")
    if tot_el > instance.max_total_elements + FEAS_TOL:
        violated.append("total_elements")
    if tot_cost > instance.max_total_cost + FEAS_TOL:
        violated.append("total_cost")
    return FeasibilityReport(not violated, card, tot_el, tot_cost, tuple(violated))


@dataclass(frozen=True)
class ScenarioConfig:
    """Random-geometry scenario; defaults reproduce the reference setup."""

    ue_positions: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (100.0, 0.0))
    rect_upper: tuple[tuple[float, float], tuple[float, float]] = ((30.0, 70.0), (20.0, 40.0))
    rect_lower: tuple[tuple[float, float], tuple[float, float]] = ((30.0, 70.0), (-40.0, -20.0))
    n_sites: int = 25
    max_irs: int = 7
    l_min: int = 5
    l_max: int = 40
    max_total_elements: float = 250
    max_total_cost: float = 75
    fixed_cost_range: tuple[float, float] = (1.0, 5.0)
    cost_rate_range: tuple[float, float] = (0.1, 0.5)
    path_loss: PathLossParams = field(default_factory=PathLossParams)
    budget: LinkBudget = field(
        default_factory=lambda: LinkBudget.from_db(25.0, -80.0, -70.0, 8.0))
    fade: FadeDistribution = field(default_factory=RayleighProduct)

    def __post_init__(self):
        for rect in (self.rect_upper, self.rect_lower):
            (x0, x1), (y0, y1) = rect
            if not (x0 < x1 and y0 < y1):
                raise ValueError(f"degenerate rectangle {rect}")
        for lo, hi in (self.fixed_cost_range, self.cost_rate_range):
            if lo > hi:
                raise ValueError("cost ranges must be ordered")
        if self.n_sites < 1 or not 0 <= self.max_irs <= self.n_sites:
            raise ValueError("need n_sites >= 1 and 0 <= max_irs <= n_sites")


def site_rho(config: ScenarioConfig, position) -> float:
    pos = np.asarray(position, dtype=float)
    delta = 1.0
    for ue in config.ue_positions:
        delta *= path_loss(config.path_loss, float(np.linalg.norm(pos - np.asarray(ue))))
    return effective_gain(config.budget, delta)


def generate_scenario(config: ScenarioConfig, seed) -> ProblemInstance:
    """Draw site positions and cost coefficients, then derive each site's beta.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    rng = np.random.default_rng(seed)
    n = config.n_sites
    upper = rng.random(n) < 0.5
    ux = rng.uniform(*config.rect_upper[0], size=n)
    uy = rng.uniform(*config.rect_upper[1], size=n)
    lx = rng.uniform(*config.rect_lower[0], size=n)
    ly = rng.uniform(*config.rect_lower[1], size=n)
    xs = np.where(upper, ux, lx)
    ys = np.where(upper, uy, ly)
    fixed = rng.uniform(*config.fixed_cost_range, size=n)
    rate = rng.uniform(*config.cost_rate_range, size=n)
    sites = []
    for i in range(n):
        pos = (float(xs[i]), float(ys[i]))
        rho = site_rho(config, pos)
        beta = beta_coeff(config.fade, config.budget, rho, config.l_max)
        sites.append(IrsSite(i, pos, config.l_min, config.l_max,
                             float(fixed[i]), float(rate[i]), beta, rho))
    return ProblemInstance(tuple(sites), config.max_irs, config.max_total_elements,
                           config.max_total_cost)


def knapsack_reduction(values: Sequence[int], weights: Sequence[int],
                       capacity: int) -> ProblemInstance:
    """0/1 knapsack as a placement instance: one element per site, costs = weights.

    Maximizing ``sum values`` under the capacity is the same as minimizing G,
    so ``G* = -(knapsack optimum)``.
    """
    if len(values) != len(weights):
        raise ValueError("values and weights differ in length")
    if any(int(v) <= 0 for v in values) or any(int(w) <= 0 for w in weights) or capacity < 0:
        raise ValueError("values and weights must be positive integers")
    n = len(values)
    sites = tuple(
        IrsSite(i, (), 1, 1, float(weights[i]), 0.0, -float(values[i]))
        for i in range(n)
    )
    return ProblemInstance(sites, n, n, float(capacity))
