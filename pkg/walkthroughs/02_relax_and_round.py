"""Solve one reference scenario with every deterministic method.

The LP relaxation gives a lower bound on G. Greedy rounding of its
solution (LPR-GA) is compared with the two baselines and, on a smaller
instance, with full enumeration.
"""

from irsplace import ScenarioConfig, aega, exhaustive, generate_scenario, lower_bound, lpr_ga, mega
from irsplace.lp import build_lpr, dump_lp

inst = generate_scenario(ScenarioConfig(), seed=7)
lpr, g_lp = lower_bound(inst)
print(f"{inst.n} candidate sites, at most {inst.max_irs} surfaces")
print(f"LP bound     G={g_lp:9.3f}  fractional sites={lpr.x_dagger.sum():.2f}")

for solve in (lpr_ga, aega, mega):
    res = solve(inst)
    f = res.feasibility
    print(f"{res.algorithm:<12} G={res.objective:9.3f}  irs={f.cardinality}  "
          f"elements={f.total_elements}  cost={f.total_cost:.1f}")

gap = lpr_ga(inst, lpr).objective - g_lp
print(f"rounding gap of LPR-GA: {gap:.3f}")

# full enumeration is only practical on small setups
small = ScenarioConfig(n_sites=7, max_irs=4, l_min=35, l_max=50,
                       max_total_elements=115, max_total_cost=30)
inst = generate_scenario(small, seed=7)
best = exhaustive(inst)
print(f"\nsmall setup: {best.meta['candidates']} candidates, optimum G={best.objective:.3f}, "
      f"LPR-GA G={lpr_ga(inst).objective:.3f}, LP bound {lower_bound(inst)[1]:.3f}")

# the relaxation as a table, first lines only
print()
print("\n".join(dump_lp(build_lpr(generate_scenario(ScenarioConfig(n_sites=3, max_irs=2), 0))).splitlines()[:5]))
