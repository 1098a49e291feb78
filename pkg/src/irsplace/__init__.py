"""Placement and sizing of reflecting surfaces for a two-way full-duplex link.

Sites are chosen and sized to minimize an upper bound on system outage.
The pieces are an LP relaxation, greedy and randomized rounding, an
exhaustive oracle and a Monte Carlo channel simulator.
"""

from .channel import (
    Duplex,
    InfiniteGainError,
    LiModel,
    LinkBudget,
    PathLossParams,
    RayleighProduct,
    beta_coeff,
    effective_gain,
    fade_cdf,
    hd_threshold,
    outage_bound_system,
    path_loss,
)
from .lp import LpStatus, build_lpr, lower_bound, solve
from .mcsim import estimate_outage, li_crossover_dbm, validate_bound
from .problem import (
    IrsSite,
    ProblemInstance,
    ScenarioConfig,
    Solution,
    check_feasibility,
    generate_scenario,
    knapsack_reduction,
    objective_G,
)
from .randomized import FailureAfterTMax, guarantees, lpr_ra
from .solvers import SolveResult, WorkCapExceeded, aega, exhaustive, lpr_ga, mega

__version__ = "0.1.0"
