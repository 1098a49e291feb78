"""How one surface element's outage probability becomes a linear objective.

Each element sees the product of two Rayleigh magnitudes. Its outage CDF has
a closed form in K1, so a site with L elements contributes L * beta to the
log of the outage bound.
"""

import math

import numpy as np

from irsplace import LinkBudget, RayleighProduct, fade_cdf, hd_threshold, outage_bound_system
from irsplace.channel import beta_coeff, mw_to_dbm
from irsplace.mcsim import li_crossover_dbm, sample_zeta

fade = RayleighProduct(1.0)

# closed form vs a quick simulation
zeta = sample_zeta(fade, np.random.default_rng(0), 200_000)
for u in (0.1, 0.5, 1.0, 2.0):
    print(f"F({u:>3}) = {float(fade_cdf(fade, u)):.5f}   simulated {np.mean(zeta <= u):.5f}")

budget = LinkBudget.from_db(25.0, -80.0, -70.0, 8.0)
print(f"\nthreshold 8 dB: FD needs SINR {budget.sinr_threshold:.2f}, HD needs {hd_threshold(budget.sinr_threshold):.2f}")

# beta for a few effective gains; weaker sites have beta closer to 0
for rho in (1e-2, 1e-1, 1.0, 10.0):
    b = beta_coeff(fade, budget, rho)
    print(f"rho={rho:>5}: beta={b:10.3e}  one element {math.exp(b):.3e}  40 elements {math.exp(40 * b):.3e}")

# the bound multiplies across sites
betas = np.array([beta_coeff(fade, budget, r) for r in (0.5, 0.8)])
print("\ntwo sites, 20 elements each:", outage_bound_system(betas, [1, 1], [20, 20]))

# below this LI power full duplex beats half duplex
print("FD/HD crossover: %.3f dBm" % li_crossover_dbm(LinkBudget.from_db(25.0, -80.0, -70.0, 9.0)))
print("noise floor for reference: %.1f dBm" % mw_to_dbm(budget.noise_mw))
