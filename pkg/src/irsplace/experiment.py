"""Parameter sweeps over random scenario ensembles, written as CSV.

Config documents are JSON with units spelled out in the key names
(``_dbm``, ``_db``, ``_m``); dB values are converted once, when the
scenario for a sweep point is built.

Seeds: scenario ``s`` of sweep point ``i`` uses
``mix_seed(master_seed, i, s, TAG["scenario"])``; randomized rounding on
that scenario uses ``mix_seed(master_seed, i, s, TAG["LPR-RA"])``.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._seeding import mix_seed
from .channel import Duplex, LiModel, LinkBudget, PathLossParams, RayleighProduct, \
    dbm_to_mw, db_to_linear, residual_li_power
from .lp import LpStatus, lower_bound
from .problem import ScenarioConfig, generate_scenario
from .randomized import FailureAfterTMax, guarantees, lpr_ra, DegenerateInstanceError
from .solvers import WorkCapExceeded, aega, exhaustive, lpr_ga, mega

logger = logging.getLogger(__name__)

WORKERS_ENV = "IRSPLACE_WORKERS"

ALGORITHMS = ("LPR", "LPR-GA", "LPR-RA", "AEGA", "MEGA", "EXHAUSTIVE")
SWEEP_PARAMETERS = ("max_total_cost", "element_max", "n_sites", "sinr_threshold_db",
                    "noise_dbm", "tx_power_dbm", "residual_li_dbm")
TAG = {"scenario": 0, "LPR": 1, "LPR-GA": 2, "LPR-RA": 3, "AEGA": 4, "MEGA": 5,
       "EXHAUSTIVE": 6}

COLUMNS = ("sweep_value", "scenario_id", "algorithm", "duplex", "objective_g",
           "upper_bound", "feasible", "num_irs", "total_elements", "total_cost",
           "lpr_lower_bound", "ra_trial_index", "runtime_micros")
AGG_COLUMNS = ("sweep_value", "duplex", "algorithm", "scenarios", "mean_upper_bound",
               "stderr_upper_bound", "mean_objective_g", "mean_num_irs",
               "mean_total_elements", "mean_total_cost", "feasible_pct")

DEFAULT_SCENARIO = {
    "n_sites": 25,
    "max_irs": 7,
    "l_min": 5,
    "l_max": 40,
    "max_total_elements": 250,
    "max_total_cost": 75,
    "tx_power_dbm": 25.0,
    "noise_dbm": -80.0,
    "residual_li_dbm": -70.0,
    "sinr_threshold_db": 8.0,
    "channel_variance": 1.0,
    "path_loss": {"a0": 1.0, "alpha": 2.7},
    "ue_positions_m": [[0.0, 0.0], [100.0, 0.0]],
    "rect_upper_m": [[30.0, 70.0], [20.0, 40.0]],
    "rect_lower_m": [[30.0, 70.0], [-40.0, -20.0]],
    "fixed_cost_range": [1.0, 5.0],
    "cost_rate_range": [0.1, 0.5],
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class ExperimentConfig:
    scenario: dict
    sweep_parameter: str | None = None
    sweep_values: list = field(default_factory=list)
    algorithms: tuple[str, ...] = ("LPR", "LPR-GA", "LPR-RA", "AEGA", "MEGA")
    ensemble_size: int = 1000
    t_max: int = 50
    master_seed: int = 0
    duplex: tuple[str, ...] = ("FD",)
    exhaustive_work_cap: int = 10**8

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("$", "config must be a JSON object")
        known = {"scenario", "sweep", "algorithms", "ensemble_size", "t_max", "master_seed",
                 "duplex", "exhaustive_work_cap"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"$.{key}", "unknown field")
        scenario = copy.deepcopy(DEFAULT_SCENARIO)
        for key, value in doc.get("scenario", {}).items():
            if key not in DEFAULT_SCENARIO and key != "li_model":
                raise ConfigError(f"$.scenario.{key}", "unknown field")
            scenario[key] = value
        sweep = doc.get("sweep", {})
        param = sweep.get("parameter")
        values = sweep.get("values", [])
        if param is not None and param not in SWEEP_PARAMETERS:
            raise ConfigError("$.sweep.parameter", f"must be one of {SWEEP_PARAMETERS}")
        if not isinstance(values, list):
            raise ConfigError("$.sweep.values", "must be a list")
        for i, v in enumerate(values):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigError(f"$.sweep.values[{i}]", "must be a number")
            if param in ("element_max", "n_sites") and int(v) != v:
                raise ConfigError(f"$.sweep.values[{i}]", "must be an integer")
        if values and param is None:
            raise ConfigError("$.sweep.parameter", "required when values are given")
        algorithms = tuple(doc.get("algorithms", cls.algorithms))
        for i, a in enumerate(algorithms):
            if a not in ALGORITHMS:
                raise ConfigError(f"$.algorithms[{i}]", f"unknown algorithm {a!r}")
        duplex = tuple(doc.get("duplex", ["FD"]))
        for i, d in enumerate(duplex):
            if d not in ("FD", "HD"):
                raise ConfigError(f"$.duplex[{i}]", "must be FD or HD")
        ensemble = doc.get("ensemble_size", 1000)
        if not isinstance(ensemble, int) or ensemble < 1:
            raise ConfigError("$.ensemble_size", "must be an integer >= 1")
        t_max = doc.get("t_max", 50)
        if not isinstance(t_max, int) or t_max < 1:
            raise ConfigError("$.t_max", "must be an integer >= 1")
        seed = doc.get("master_seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("$.master_seed", "must be a nonnegative integer")
        cfg = cls(scenario, param, list(values), algorithms, ensemble, t_max, seed, duplex,
                  int(doc.get("exhaustive_work_cap", 10**8)))
        # surface scenario errors at parse time, not inside a worker
        for i, v in enumerate(cfg.sweep_values or [None]):
            try:
                for d in cfg.duplex:
                    cfg.scenario_config(v, d)
            except ConfigError:
                raise
            except (ValueError, TypeError, KeyError) as exc:
                where = f"$.sweep.values[{i}]" if v is not None else "$.scenario"
                raise ConfigError(where, str(exc)) from exc
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def scenario_config(self, sweep_value=None, duplex: str = "FD") -> ScenarioConfig:
        s = dict(self.scenario)
        if self.sweep_parameter is not None and sweep_value is not None:
            key = "l_max" if self.sweep_parameter == "element_max" else self.sweep_parameter
            s[key] = sweep_value
        p_mw = dbm_to_mw(s["tx_power_dbm"])
        if s.get("li_model") is not None and self.sweep_parameter != "residual_li_dbm":
            li_mw = residual_li_power(LiModel(**s["li_model"]), p_mw)
        else:
            li_mw = dbm_to_mw(s["residual_li_dbm"])
        budget = LinkBudget(p_mw, dbm_to_mw(s["noise_dbm"]), li_mw,
                            db_to_linear(s["sinr_threshold_db"]))
        if duplex == "HD":
            budget = budget.half_duplex()
        to_pair = lambda v: (float(v[0]), float(v[1]))
        return ScenarioConfig(
            ue_positions=tuple(to_pair(p) for p in s["ue_positions_m"]),
            rect_upper=tuple(to_pair(r) for r in s["rect_upper_m"]),
            rect_lower=tuple(to_pair(r) for r in s["rect_lower_m"]),
            n_sites=int(s["n_sites"]),
            max_irs=int(s["max_irs"]),
            l_min=int(s["l_min"]),
            l_max=int(s["l_max"]),
            max_total_elements=float(s["max_total_elements"]),
            max_total_cost=float(s["max_total_cost"]),
            fixed_cost_range=to_pair(s["fixed_cost_range"]),
            cost_rate_range=to_pair(s["cost_rate_range"]),
            path_loss=PathLossParams(**s["path_loss"]),
            budget=budget,
            fade=RayleighProduct(float(s["channel_variance"])),
        )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _row(sweep_value, scenario_id, algorithm, duplex, g, feasible, num_irs, total_elements,
         total_cost, lpr_g, trial=None, runtime=None) -> dict:
    return {
        "sweep_value": sweep_value, "scenario_id": scenario_id, "algorithm": algorithm,
        "duplex": duplex, "objective_g": g,
        "upper_bound": None if g is None else math.exp(g),
        "feasible": feasible, "num_irs": num_irs, "total_elements": total_elements,
        "total_cost": total_cost, "lpr_lower_bound": lpr_g, "ra_trial_index": trial,
        "runtime_micros": runtime,
    }


def _result_row(sv, sid, duplex, res, lpr_g, timing, tag=None, trial=None):
    f = res.feasibility
    rt = round(res.meta.get("runtime_s", 0.0) * 1e6) if timing else None
    return _row(sv, sid, tag or res.algorithm, duplex, res.objective, f.feasible,
                f.cardinality, f.total_elements, f.total_cost, lpr_g, trial, rt)


def run_scenario(cfg: ExperimentConfig, sweep_index: int, scenario_id: int,
                 timing: bool = False) -> tuple[list[dict], list[dict]]:
    """All selected algorithms on one scenario, for every duplex mode."""
    sweep_value = cfg.sweep_values[sweep_index] if cfg.sweep_values else None
    seed = mix_seed(cfg.master_seed, sweep_index, scenario_id, TAG["scenario"])
    ra_seed = mix_seed(cfg.master_seed, sweep_index, scenario_id, TAG["LPR-RA"])
    rows, audits = [], []
    for duplex in cfg.duplex:
        inst = generate_scenario(cfg.scenario_config(sweep_value, duplex), seed)
        need_lp = any(a in cfg.algorithms for a in ("LPR", "LPR-GA", "LPR-RA"))
        lpr, g_dag = (None, None)
        if need_lp:
            t0 = time.perf_counter()
            lpr, g_dag = lower_bound(inst)
            lp_time = time.perf_counter() - t0
            if lpr.status is not LpStatus.OPTIMAL:
                raise RuntimeError(f"relaxation {lpr.status.value} on scenario {scenario_id}")
        for alg in cfg.algorithms:
            if alg == "LPR":
                rt = round(lp_time * 1e6) if timing else None
                rows.append(_row(sweep_value, scenario_id, "LPR", duplex, g_dag, True,
                                 float(lpr.x_dagger.sum()), float(lpr.z_dagger.sum()),
                                 float(inst.fixed_cost @ lpr.x_dagger
                                       + inst.cost_rate @ lpr.z_dagger), g_dag, None, rt))
            elif alg == "LPR-GA":
                rows.append(_result_row(sweep_value, scenario_id, duplex, lpr_ga(inst, lpr),
                                        g_dag, timing))
            elif alg == "LPR-RA":
                ra = lpr_ra(inst, lpr, cfg.t_max, ra_seed)
                if isinstance(ra, FailureAfterTMax):
                    last = ra.trials[-1]
                    f = last.feasibility
                    rows.append(_row(sweep_value, scenario_id, "LPR-RA", duplex,
                                     last.objective, False, f.cardinality, f.total_elements,
                                     f.total_cost, g_dag))
                    rows.append(_result_row(sweep_value, scenario_id, duplex,
                                            lpr_ga(inst, lpr), g_dag, timing,
                                            tag="LPR-RA-FALLBACK"))
                else:
                    rows.append(_result_row(sweep_value, scenario_id, duplex, ra, g_dag,
                                            timing, trial=ra.meta["trial_index"]))
                try:
                    bundle = guarantees(inst, lpr).to_dict()
                except DegenerateInstanceError as exc:
                    bundle = {"error": str(exc)}
                audits.append({"sweep_value": sweep_value, "scenario_id": scenario_id,
                               "duplex": duplex, **bundle})
            elif alg == "AEGA":
                rows.append(_result_row(sweep_value, scenario_id, duplex, aega(inst),
                                        g_dag, timing))
            elif alg == "MEGA":
                rows.append(_result_row(sweep_value, scenario_id, duplex, mega(inst),
                                        g_dag, timing))
            elif alg == "EXHAUSTIVE":
                try:
                    res = exhaustive(inst, cfg.exhaustive_work_cap)
                    rows.append(_result_row(sweep_value, scenario_id, duplex, res, g_dag,
                                            timing))
                except WorkCapExceeded as exc:
                    rows.append(_row(sweep_value, scenario_id, "EXHAUSTIVE-REFUSED", duplex,
                                     None, False, None, None, None, g_dag))
                    logger.warning("scenario %d: %s", scenario_id, exc)
    return rows, audits


def _task(args):
    cfg, i, s, timing = args
    return run_scenario(cfg, i, s, timing)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"env:{WORKERS_ENV}", f"not an integer: {raw!r}")


def run_rows(cfg: ExperimentConfig, timing: bool = False, workers: int | None = None):
    """Rows and audit records in grid order (sweep point, then scenario)."""
    tasks = [(cfg, i, s, timing) for i in range(len(cfg.sweep_values))
             for s in range(cfg.ensemble_size)]
    workers = _workers() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        results = [_task(t) for t in tasks]
    rows, audits = [], []
    for r, a in results:
        rows.extend(r)
        audits.extend(a)
    return rows, audits


def aggregate(cfg: ExperimentConfig, rows: list[dict]) -> list[dict]:
    """Per (sweep value, duplex, algorithm) means; failed roundings count via their fallback."""
    out = []
    for sv in cfg.sweep_values:
        for duplex in cfg.duplex:
            sel = [r for r in rows if r["sweep_value"] == sv and r["duplex"] == duplex]
            for alg in cfg.algorithms:
                if alg == "LPR-RA":
                    ok = [r for r in sel if r["algorithm"] == "LPR-RA" and r["feasible"]]
                    fb = [r for r in sel if r["algorithm"] == "LPR-RA-FALLBACK"]
                    use = ok + fb
                    n_all = len(ok) + len(fb)
                    pct = 100.0 * len(ok) / n_all if n_all else None
                else:
                    use = [r for r in sel if r["algorithm"] == alg]
                    n_all = len(use) + sum(r["algorithm"] == "EXHAUSTIVE-REFUSED" for r in sel
                                           if alg == "EXHAUSTIVE")
                    pct = 100.0 * sum(bool(r["feasible"]) for r in use) / n_all if n_all else None
                if not use:
                    out.append({"sweep_value": sv, "duplex": duplex, "algorithm": alg,
                                "scenarios": 0, "feasible_pct": pct})
                    continue
                ub = np.array([r["upper_bound"] for r in use])
                out.append({
                    "sweep_value": sv, "duplex": duplex, "algorithm": alg,
                    "scenarios": len(use),
                    "mean_upper_bound": float(ub.mean()),
                    "stderr_upper_bound": float(ub.std(ddof=1) / math.sqrt(ub.size))
                    if ub.size > 1 else 0.0,
                    "mean_objective_g": float(np.mean([r["objective_g"] for r in use])),
                    "mean_num_irs": float(np.mean([r["num_irs"] for r in use])),
                    "mean_total_elements": float(np.mean([r["total_elements"] for r in use])),
                    "mean_total_cost": float(np.mean([r["total_cost"] for r in use])),
                    "feasible_pct": pct,
                })
    return out


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, out_dir, timing: bool = False,
                   workers: int | None = None) -> dict:
    """Write ``results.csv``, ``aggregates.csv`` and ``guarantees.jsonl`` into ``out_dir``.

    Output bytes depend only on the config (and master seed) unless
    ``timing`` is set, which fills the runtime column.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, audits = run_rows(cfg, timing, workers)
    agg = aggregate(cfg, rows)
    paths = {
        "results": out / "results.csv",
        "aggregates": out / "aggregates.csv",
        "guarantees": out / "guarantees.jsonl",
    }
    paths["results"].write_text(to_csv(rows, COLUMNS))
    paths["aggregates"].write_text(to_csv(agg, AGG_COLUMNS))
    paths["guarantees"].write_text("".join(json.dumps(a, sort_keys=True) + "\n"
                                           for a in audits))
    return {"paths": paths, "rows": rows, "aggregates": agg}
