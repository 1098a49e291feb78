"""Channel-level Monte Carlo: sampled fades, best-IRS activation, empirical outage.

Random numbers come from per-(seed, site, chunk) substreams and are drawn
element-major, so a site with ``L`` elements sees exactly the first ``L``
element draws of the same site with more elements. Comparisons that change
one site's size, or add a site, therefore use common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from ._seeding import substream
from .channel import (
    FadeDistribution,
    LinkBudget,
    RayleighProduct,
    beta_coeff,
    dbm_to_mw,
    effective_gain,
    li_crossover_mw,
    mw_to_dbm,
    outage_bound_system,
    rayleigh_from_uniform,
)
from .problem import ProblemInstance, Solution

CHUNK = 1 << 15


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    trials: int
    seed: int

    @classmethod
    def from_count(cls, outages: int, trials: int, seed: int) -> "OutageEstimate":
        p = outages / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)


@dataclass
class SiteSlack:
    site: int
    elements: int
    p_hat: float
    stderr: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.p_hat


@dataclass
class BoundReport:
    estimate: OutageEstimate
    bound: float
    holds: bool
    sigmas: float
    per_site: list[SiteSlack] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)


def sample_zeta(dist: FadeDistribution, rng: np.random.Generator, size=None):
    """Cascaded fade magnitudes ``|h||g|``, one per requested element."""
    out = dist.sample(rng, 1 if size is None else size)
    return float(out[0]) if size is None else out


def max_sinr(rho_n, zeta_sum):
    """SINR after co-phasing all elements: ``rho * (sum of magnitudes)^2``."""
    return rho_n * np.square(zeta_sum)


def _zeta_sums(dist: FadeDistribution, elements: int, trials: int, seed: int,
               site: int) -> np.ndarray:
    if not isinstance(dist, RayleighProduct):
        raise TypeError(f"unsupported fade model {type(dist).__name__}")
    scale = math.sqrt(dist.sigma_sq / 2.0)
    out = np.empty(trials)
    for k, start in enumerate(range(0, trials, CHUNK)):
        stop = min(start + CHUNK, trials)
        u = substream(seed, site, k).random((elements, 2, CHUNK))[:, :, : stop - start]
        zeta = rayleigh_from_uniform(u[:, 0], scale) * rayleigh_from_uniform(u[:, 1], scale)
        out[start:stop] = zeta.sum(axis=0)
    return out


def site_outage_indicators(rho: float, elements: int, threshold: float, trials: int,
                           seed: int, site: int = 0,
                           dist: FadeDistribution = RayleighProduct()) -> np.ndarray:
    """Boolean array, True where a single IRS of ``elements`` elements is in outage."""
    gamma = max_sinr(rho, _zeta_sums(dist, elements, trials, seed, site))
    return gamma <= threshold


def _installed_indicators(instance, solution, budget, trials, seed, dist):
    rho = instance.rho
    threshold = budget.effective_threshold
    installed = np.flatnonzero(solution.x)
    if np.any(np.isnan(rho[installed])):
        raise ValueError("instance sites need rho values for simulation")
    return installed, [
        site_outage_indicators(rho[i], int(solution.elements[i]), threshold, trials, seed,
                               site=int(i), dist=dist)
        for i in installed
    ]


def estimate_outage(instance: ProblemInstance, solution: Solution, budget: LinkBudget,
                    trials: int, seed: int,
                    dist: FadeDistribution = RayleighProduct()) -> OutageEstimate:
    """Fraction of slots where even the best installed IRS is at or below threshold.

    With nothing installed every slot is an outage. Per-site gains come from
    ``instance``; ``budget`` supplies the threshold (HD budgets use the
    converted threshold).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _, indicators = _installed_indicators(instance, solution, budget, trials, seed, dist)
    outage = np.ones(trials, dtype=bool)
    for ind in indicators:
        outage &= ind
    return OutageEstimate.from_count(int(outage.sum()), trials, seed)


def validate_bound(instance: ProblemInstance, solution: Solution, budget: LinkBudget,
                   trials: int, seed: int, dist: FadeDistribution = RayleighProduct(),
                   sigmas: float = 4.0) -> BoundReport:
    """Check empirical outage against the product bound, system-wide and per site."""
    if trials < 10**4:
        raise ValueError("bound validation needs at least 1e4 trials")
    installed, indicators = _installed_indicators(instance, solution, budget, trials,
                                                  seed, dist)
    outage = np.ones(trials, dtype=bool)
    per_site = []
    violations = []
    for i, ind in zip(installed, indicators):
        outage &= ind
        est = OutageEstimate.from_count(int(ind.sum()), trials, seed)
        f = math.exp(instance.beta[i])
        site_bound = f ** int(solution.elements[i])
        per_site.append(SiteSlack(int(i), int(solution.elements[i]), est.p_hat,
                                  est.stderr, site_bound))
        if est.p_hat > site_bound + sigmas * est.stderr:
            violations.append(f"site {i}: p_hat={est.p_hat:.6g} > bound={site_bound:.6g}")
    est = OutageEstimate.from_count(int(outage.sum()), trials, seed)
    bound = outage_bound_system(instance.beta, solution.x, solution.elements)
    if est.p_hat > bound + sigmas * est.stderr:
        violations.append(f"system: p_hat={est.p_hat:.6g} > bound={bound:.6g}")
    return BoundReport(est, bound, not violations, sigmas, per_site, violations)


def per_link_betas(dist: FadeDistribution, budget: LinkBudget, delta_n: float,
                   l_max: int | None = None) -> tuple[float, float]:
    """Per-element log outage for the FD budget and its HD counterpart."""
    fd = beta_coeff(dist, budget, effective_gain(budget, delta_n), l_max)
    hd_budget = budget.half_duplex()
    hd = beta_coeff(dist, hd_budget, effective_gain(hd_budget, delta_n), l_max)
    return fd, hd


def find_li_crossover_dbm(budget: LinkBudget, delta_n: float,
                          dist: FadeDistribution = RayleighProduct(),
                          bracket_dbm: tuple[float, float] = (-100.0, -40.0)) -> float:
    """Residual-LI power (dBm) where the FD and HD per-link bounds swap order.

    Found by root-bracketing the difference of the two log bounds; no use is
    made of the closed-form threshold relation.
    """
    def diff(li_dbm):
        b = replace(budget, residual_li_mw=dbm_to_mw(li_dbm))
        fd, hd = per_link_betas(dist, b, delta_n)
        return fd - hd

    lo, hi = bracket_dbm
    if diff(lo) * diff(hi) > 0:
        raise ValueError("no crossover inside the bracket")
    return optimize.brentq(diff, lo, hi, xtol=1e-10)


def li_crossover_dbm(budget: LinkBudget) -> float:
    return mw_to_dbm(li_crossover_mw(budget))
