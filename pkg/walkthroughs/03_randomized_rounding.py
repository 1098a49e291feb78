"""Randomized rounding: what its concentration guarantees promise and what
one scenario actually delivers."""

import numpy as np

from irsplace import FailureAfterTMax, ScenarioConfig, generate_scenario, guarantees, lower_bound, lpr_ra
from irsplace._seeding import substream
from irsplace.randomized import rounding_statistics, sample_rounding

inst = generate_scenario(ScenarioConfig(), seed=3)
lpr, g_lp = lower_bound(inst)
gb = guarantees(inst, lpr)
print(f"xi={gb.xi:.3e}  (all four deviations at once fail with prob <= {gb.xi_double_prime:.3e})")
print("epsilon:", np.round(gb.epsilon, 3))

# 20k draws; the sample means sit on the LP values
X, L = sample_rounding(inst, lpr, 20_000, substream(3, 0))
st = rounding_statistics(inst, X, L)
for key, target in (("objective", gb.expected_objective), ("cardinality", gb.expected_cardinality),
                    ("total_elements", gb.expected_total_elements),
                    ("total_cost", gb.expected_total_cost)):
    print(f"{key:<15} mean {st[key].mean():9.3f}   expected {target:9.3f}")

res = lpr_ra(inst, lpr, t_max=50, seed=11)
if isinstance(res, FailureAfterTMax):
    print("no feasible draw in", res.t_max, "trials")
else:
    print(f"\nLPR-RA accepted trial {res.meta['trial_index']}: G={res.objective:.3f} (LP bound {g_lp:.3f})")
