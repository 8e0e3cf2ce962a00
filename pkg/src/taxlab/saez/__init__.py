from .economy import (
    FixedLaborEconomy,
    PerturbationRun,
    RationalEconomy,
    estimate_elasticity,
)
from .empirical import EmpiricalIncomeDist, pareto_parameter
from .solvers import (
    SaezSolveResult,
    brute_force_flat_tax,
    grid_perturb_search,
    solve_piecewise_saez,
)
from .stats import SaezBracketStats, WelfareWeights, bracket_statistics, saez_rate

__all__ = [
    "EmpiricalIncomeDist",
    "FixedLaborEconomy",
    "PerturbationRun",
    "RationalEconomy",
    "SaezBracketStats",
    "SaezSolveResult",
    "WelfareWeights",
    "bracket_statistics",
    "brute_force_flat_tax",
    "estimate_elasticity",
    "grid_perturb_search",
    "pareto_parameter",
    "saez_rate",
    "solve_piecewise_saez",
]
