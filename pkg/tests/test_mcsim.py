import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from irsplace.channel import LinkBudget, RayleighProduct, dbm_to_mw, fade_cdf
from irsplace.mcsim import (
    OutageEstimate,
    estimate_outage,
    find_li_crossover_dbm,
    li_crossover_dbm,
    max_sinr,
    per_link_betas,
    sample_zeta,
    site_outage_indicators,
    validate_bound,
)
from irsplace.problem import ScenarioConfig, Solution, generate_scenario

UNIT = RayleighProduct(1.0)
CFG = ScenarioConfig(n_sites=6, max_irs=3, l_min=1, l_max=10, max_total_elements=30,
                     max_total_cost=100)


def small_instance(seed=0):
    return generate_scenario(CFG, seed)


def installed(inst, sites, el):
    x = np.zeros(inst.n, dtype=np.int64)
    x[list(sites)] = 1
    return Solution.build(inst, x, np.where(x == 1, el, inst.l_min))


def test_samples_nonnegative_and_scalar_form():
    z = sample_zeta(UNIT, np.random.default_rng(0), 10_000)
    assert z.shape == (10_000,) and np.all(z >= 0)
    assert isinstance(sample_zeta(UNIT, np.random.default_rng(0)), float)


def test_empirical_cdf_at_half():
    n = 10**6
    z = sample_zeta(UNIT, np.random.default_rng(1), n)
    p = 0.3980927698
    assert abs((z <= 0.5).mean() - p) <= 3 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("sigma_sq", [1.0, 2.5])
def test_ks_against_closed_form_cdf(sigma_sq):
    dist = RayleighProduct(sigma_sq)
    z = sample_zeta(dist, np.random.default_rng(2), 10**5)
    assert stats.kstest(z, lambda u: fade_cdf(dist, u)).pvalue > 0.01


def test_max_sinr():
    assert max_sinr(1.92, 0.0) == 0.0
    assert max_sinr(1.92, 2.0) == pytest.approx(7.68)
    assert max_sinr(1.92, 6.0) == pytest.approx(9 * max_sinr(1.92, 2.0))


def test_empty_installation_is_certain_outage():
    inst = small_instance()
    est = estimate_outage(inst, Solution.empty(inst), CFG.budget, 1000, seed=0)
    assert est.p_hat == 1.0 and est.stderr == 0.0


def test_single_element_matches_per_element_cdf():
    inst = small_instance(1)
    trials = 10**5
    for site in range(inst.n):
        est = estimate_outage(inst, installed(inst, [site], 1), CFG.budget, trials, seed=site)
        f = math.exp(inst.beta[site])
        assert abs(est.p_hat - f) <= 4 * math.sqrt(f * (1 - f) / trials) + 1e-12


def test_joint_outage_is_product_of_marginals():
    inst = small_instance(2)
    trials = 10**5
    sol = installed(inst, [0, 3, 4], 2)
    joint = estimate_outage(inst, sol, CFG.budget, trials, seed=10).p_hat
    # marginals from independent seeds
    marg = [estimate_outage(inst, installed(inst, [i], 2), CFG.budget, trials,
                            seed=100 + i).p_hat for i in (0, 3, 4)]
    prod = float(np.prod(marg))
    # delta-method error of the product plus the joint estimate's own error
    var_prod = sum((prod / m) ** 2 * m * (1 - m) / trials for m in marg)
    var_joint = prod * (1 - prod) / trials
    assert abs(joint - prod) <= 4 * math.sqrt(var_prod + var_joint)


def test_common_random_numbers_make_outage_monotone():
    inst = small_instance(3)
    thr = CFG.budget.effective_threshold
    prev = None
    for el in range(1, 11):
        ind = site_outage_indicators(inst.rho[0], el, thr, 20_000, seed=7, site=0)
        if prev is not None:
            # pathwise: an outage with more elements implies an outage with fewer
            assert np.all(prev | ~ind)
        prev = ind


def test_adding_a_site_never_raises_outage():
    inst = small_instance(4)
    a = estimate_outage(inst, installed(inst, [1], 3), CFG.budget, 50_000, seed=5)
    b = estimate_outage(inst, installed(inst, [1, 2], 3), CFG.budget, 50_000, seed=5)
    assert b.p_hat <= a.p_hat


def test_bound_holds_and_reports_per_site():
    inst = small_instance(5)
    rep = validate_bound(inst, installed(inst, [0, 2], 5), CFG.budget, 10**5, seed=1)
    assert rep.holds and not rep.violations
    assert [s.site for s in rep.per_site] == [0, 2]
    assert all(s.slack >= -4 * s.stderr for s in rep.per_site)
    assert rep.bound == pytest.approx(math.exp(5 * (inst.beta[0] + inst.beta[2])))


def test_bound_violation_is_reported_not_raised():
    inst = small_instance(6)
    # a budget whose threshold is far above the one used to build beta
    harsher = LinkBudget(CFG.budget.tx_power_mw, CFG.budget.noise_mw, CFG.budget.residual_li_mw,
                         CFG.budget.sinr_threshold * 1e4)
    rep = validate_bound(inst, installed(inst, [0], 1), harsher, 10**4, seed=2)
    assert not rep.holds and rep.violations


def test_validation_requires_enough_trials():
    inst = small_instance()
    with pytest.raises(ValueError):
        validate_bound(inst, installed(inst, [0], 1), CFG.budget, 999, seed=0)


def test_estimate_is_reproducible():
    inst = small_instance(7)
    sol = installed(inst, [0, 1], 4)
    a = estimate_outage(inst, sol, CFG.budget, 40_000, seed=3)
    b = estimate_outage(inst, sol, CFG.budget, 40_000, seed=3)
    assert a == b
    assert a == OutageEstimate.from_count(round(a.p_hat * 40_000), 40_000, 3)


def test_fd_hd_crossover():
    budget = LinkBudget.from_db(25.0, -80.0, -70.0, 9.0)
    closed = li_crossover_dbm(budget)
    assert closed == pytest.approx(-70.49, abs=0.2)
    assert find_li_crossover_dbm(budget, 1e-9) == pytest.approx(closed, abs=1e-6)
    # below the crossover FD wins, above it HD wins
    for li_dbm, fd_better in ((closed - 1, True), (closed + 1, False)):
        b = replace(budget, residual_li_mw=dbm_to_mw(li_dbm))
        fd, hd = per_link_betas(UNIT, b, 1e-9)
        assert (fd < hd) is fd_better
