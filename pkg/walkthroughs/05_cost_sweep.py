"""A small cost-budget sweep through the experiment runner.

Writes results.csv, aggregates.csv and guarantees.jsonl to a temp dir and
prints the mean outage bound per algorithm. Same as running

    python -m irsplace run sweep.json --out DIR
"""

import tempfile

from irsplace.experiment import ExperimentConfig, run_experiment

cfg = ExperimentConfig.from_dict({
    "sweep": {"parameter": "max_total_cost", "values": [25, 50, 100, 150]},
    "algorithms": ["LPR", "LPR-GA", "LPR-RA", "AEGA", "MEGA"],
    "ensemble_size": 40,
    "master_seed": 1,
})
out_dir = tempfile.mkdtemp()
out = run_experiment(cfg, out_dir)

algs = cfg.algorithms
print("C_tot  " + "".join(f"{a:>11}" for a in algs))
for c in cfg.sweep_values:
    means = {a["algorithm"]: a["mean_upper_bound"] for a in out["aggregates"] if a["sweep_value"] == c}
    print(f"{c:>5}  " + "".join(f"{means[a]:11.2e}" for a in algs))
print("\nfiles in", out_dir)
