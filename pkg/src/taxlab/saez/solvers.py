"""Schedule optimizers: a damped fixed point on the per-bracket rate
formula, plus welfare-grid oracles used to validate it."""

import math
from dataclasses import dataclass

from ..fiscal import TaxSchedule
from .economy import estimate_elasticity
from .stats import bracket_statistics, saez_rate


@dataclass(frozen=True)
class SaezSolveResult:
    schedule: TaxSchedule
    swf: float
    converged: bool
    iterations: int
    trace: tuple

    def to_dict(self):
        return {
            "schedule": self.schedule.to_dict(),
            "swf": self.swf,
            "converged": self.converged,
            "iterations": self.iterations,
            "trace": list(self.trace),
        }


def solve_piecewise_saez(economy, schedule_init, dtau=0.01, damping=0.5,
                         max_iters=30, tol=1e-3, rebate_mode="equilibrium"):
    """Damped fixed point: each iterate measures per-bracket elasticities by
    perturbation, recomputes bracket statistics, and moves every rate part
    way toward its formula target.

    Returns the best-welfare iterate visited (never below the start), with
    a converged flag and a JSON-ready per-iteration trace.
    """
    if not (0.0 < damping <= 1.0):
        raise ValueError("damping must be in (0, 1]")
    if dtau == 0.0:
        raise ValueError("dtau must be nonzero")
    schedule = schedule_init
    best_schedule, best_swf = schedule_init, -math.inf
    trace = []
    converged = False
    for _ in range(max_iters):
        incomes, _ = economy.converged_incomes(schedule)
        swf = economy.swf(schedule)
        if swf > best_swf:
            best_schedule, best_swf = schedule, swf
        targets, e_row, g_row, alpha_row = [], [], [], []
        for j in range(schedule.n_brackets):
            step = dtau
            if schedule.rates[j] + step > schedule.rate_max:
                step = -dtau
            run = economy.perturb(schedule, j, step, rebate_mode=rebate_mode)
            elasticity = estimate_elasticity(run)
            stats = bracket_statistics(incomes, economy.weights, schedule, j)
            if elasticity is None or stats is None:
                targets.append(schedule.rates[j])
                e_row.append(None)
                g_row.append(None if stats is None else stats.G)
                alpha_row.append(None if stats is None else stats.alpha)
                continue
            try:
                target = saez_rate(stats.G, stats.alpha, elasticity,
                                   schedule.rate_min, schedule.rate_max)
            except ValueError:
                target = schedule.rates[j]
            targets.append(target)
            e_row.append(elasticity)
            g_row.append(stats.G)
            alpha_row.append(stats.alpha)
        new_rates = tuple((1.0 - damping) * old + damping * tgt
                          for old, tgt in zip(schedule.rates, targets))
        trace.append({"rates": list(schedule.rates), "swf": swf,
                      "elasticity": e_row, "G": g_row, "alpha": alpha_row,
                      "target": targets})
        max_change = max(abs(new - old)
                         for new, old in zip(new_rates, schedule.rates))
        schedule = TaxSchedule(thresholds=schedule.thresholds,
                               rates=new_rates, rate_min=schedule.rate_min,
                               rate_max=schedule.rate_max)
        if max_change < tol:
            converged = True
            break
    final_swf = economy.swf(schedule)
    if final_swf > best_swf:
        best_schedule, best_swf = schedule, final_swf
    return SaezSolveResult(schedule=best_schedule, swf=best_swf,
                           converged=converged, iterations=len(trace),
                           trace=tuple(trace))


def brute_force_flat_tax(economy, grid_step=0.01):
    """Exhaustive flat-rate sweep over {0, step, ..., <= 0.99}; ties go to
    the smaller rate."""
    if not (0.0 < grid_step <= 0.1):
        raise ValueError("grid_step must be in (0, 0.1], got %r" % (grid_step,))
    n_points = int(math.floor(0.99 / grid_step + 1e-9)) + 1
    best_tau, best_swf = None, -math.inf
    for k in range(n_points):
        tau = round(k * grid_step, 10)
        swf = economy.swf(TaxSchedule(thresholds=(0.0,), rates=(tau,)))
        if swf > best_swf:
            best_tau, best_swf = tau, swf
    return best_tau, best_swf


def grid_perturb_search(schedule_init, economy, per_bracket_grid):
    """One coordinate sweep: bracket by bracket, try each grid offset
    (percentage points) around the current rate with the others held
    fixed, and keep the welfare-maximizing one. Never loses welfare."""
    grid = [float(off) for off in per_bracket_grid]
    if not grid:
        raise ValueError("per_bracket_grid must be nonempty")
    rates = list(schedule_init.rates)
    lo, hi = schedule_init.rate_min, schedule_init.rate_max

    def swf_at(current):
        return economy.swf(TaxSchedule(thresholds=schedule_init.thresholds,
                                       rates=tuple(current), rate_min=lo,
                                       rate_max=hi))

    best_swf = swf_at(rates)
    for j in range(schedule_init.n_brackets):
        candidates = sorted({min(max(rates[j] + off / 100.0, lo), hi)
                             for off in grid})
        best_rate = rates[j]
        for candidate in candidates:
            if candidate == rates[j]:
                continue
            trial = list(rates)
            trial[j] = candidate
            swf = swf_at(trial)
            if swf > best_swf:
                best_swf, best_rate = swf, candidate
        rates[j] = best_rate
    return TaxSchedule(thresholds=schedule_init.thresholds,
                       rates=tuple(rates), rate_min=lo, rate_max=hi)
