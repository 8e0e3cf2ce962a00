"""Scripted-rational economies the solvers query, plus perturbation-based
elasticity estimation.

Welfare here uses weights frozen at the zero-tax reference incomes. Live
inverse-income weights would reward shrinking incomes themselves (utility
per dollar grows as the denominator falls), which makes the highest rate
trivially optimal; freezing the weights keeps the planner scored on the
same population it started from, so distortion and redistribution trade
off the way the rate formula assumes.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..fiscal import TaxSchedule, isoelastic_utility
from .stats import WelfareWeights

REBATE_MODES = ("fixed", "equilibrium")


@dataclass(frozen=True)
class PerturbationRun:
    """Matched baseline/perturbed equilibria differing in one bracket rate."""

    baseline_schedule: TaxSchedule
    baseline_incomes: tuple
    perturbed_schedule: TaxSchedule
    perturbed_incomes: tuple
    bracket: int
    dtau: float

    def __post_init__(self):
        base = self.baseline_schedule
        pert = self.perturbed_schedule
        if base.thresholds != pert.thresholds:
            raise ValueError("schedules must share thresholds")
        diffs = [j for j, (a, b) in enumerate(zip(base.rates, pert.rates))
                 if a != b]
        if diffs != [self.bracket]:
            raise ValueError("schedules must differ in exactly bracket %d, "
                             "differ in %r" % (self.bracket, diffs))
        got = pert.rates[self.bracket] - base.rates[self.bracket]
        if abs(got - self.dtau) > 1e-12:
            raise ValueError("rate shift %r does not match dtau %r"
                             % (got, self.dtau))
        if len(self.baseline_incomes) != len(self.perturbed_incomes):
            raise ValueError("income vectors must align")
        object.__setattr__(self, "baseline_incomes",
                           tuple(float(z) for z in self.baseline_incomes))
        object.__setattr__(self, "perturbed_incomes",
                           tuple(float(z) for z in self.perturbed_incomes))


class RationalEconomy:
    """A fixed population of exact best-responders.

    Queries converge the rebate fixed point (labor responds to the rebate,
    the rebate rebalances to the new taxes) and report incomes or frozen-
    weight welfare for any schedule.
    """

    def __init__(self, skills, params, labor_bounds=(0.0, 100.0),
                 weight_floor=1e-6, rebate_tol=1e-6, max_rebate_iters=500):
        skills = np.asarray(skills, dtype=np.float64).ravel()
        if skills.size == 0:
            raise ValueError("need at least one worker")
        if not np.all(np.isfinite(skills)) or np.any(skills < 0):
            raise ValueError("skills must be finite and >= 0")
        self.skills = skills
        self.params = params
        self.labor_bounds = (float(labor_bounds[0]), float(labor_bounds[1]))
        # The labor kernel is exact only to the float-flatness of the
        # objective (~1e-6 hours), so the rebate cannot be pinned tighter.
        self.rebate_tol = float(rebate_tol)
        self.max_rebate_iters = int(max_rebate_iters)
        self._cache = {}
        reference = TaxSchedule(thresholds=(0.0,), rates=(0.0,))
        self.reference_incomes, _ = self.converged_incomes(reference)
        self.weights = WelfareWeights.from_incomes(self.reference_incomes,
                                                   floor=weight_floor)

    def _labor(self, schedule, rebate):
        return _kernels.best_response_many(
            self.skills, schedule.thresholds, schedule.rates, float(rebate),
            self.params.eta, self.params.psi, self.params.delta,
            self.labor_bounds[0], self.labor_bounds[1])

    def labor_and_incomes(self, schedule, rebate):
        """One-shot best response at a held-fixed rebate."""
        labor = self._labor(schedule, rebate)
        return labor, self.skills * labor

    def _mean_tax(self, schedule, rebate):
        labor = self._labor(schedule, rebate)
        incomes = self.skills * labor
        total = _kernels.tax_due_many(schedule.thresholds, schedule.rates,
                                      incomes).sum()
        return float(total) / self.skills.size, incomes

    def converged_incomes(self, schedule):
        """(incomes, rebate) at the rebate fixed point.

        Damped iteration handles the common case; when a worker's best
        response jumps discontinuously in the rebate (possible once
        bracket rates are non-monotone) the iteration limit-cycles, so
        the fallback bisects mean_tax(R) - R, which is nonincreasing:
        extra lump-sum income never raises labor, and post-tax income
        rises with pre-tax income at any rate below one.
        """
        cached = self._cache.get(schedule)
        if cached is not None:
            incomes, rebate = cached
            return incomes.copy(), rebate
        rebate = 0.0
        result = None
        for _ in range(self.max_rebate_iters):
            new_rebate, incomes = self._mean_tax(schedule, rebate)
            if abs(new_rebate - rebate) <= self.rebate_tol * max(
                    1.0, abs(new_rebate)):
                result = (incomes, new_rebate)
                break
            rebate = 0.5 * rebate + 0.5 * new_rebate
        if result is None:
            result = self._bisect_rebate(schedule)
        if len(self._cache) >= 512:
            self._cache.clear()
        self._cache[schedule] = result
        return result[0].copy(), result[1]

    def _bisect_rebate(self, schedule):
        lo = 0.0
        hi, incomes_lo = self._mean_tax(schedule, 0.0)
        if hi <= 0.0:
            return incomes_lo, 0.0
        best_gap, best = float("inf"), None
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            mean_tax, incomes = self._mean_tax(schedule, mid)
            gap = abs(mean_tax - mid)
            if gap < best_gap:
                best_gap, best = gap, (incomes, mid)
            if gap <= self.rebate_tol * max(1.0, mean_tax):
                return incomes, mid
            if mean_tax > mid:
                lo = mid
            else:
                hi = mid
        return best

    def swf(self, schedule):
        """Frozen-weight social welfare at the schedule's equilibrium."""
        incomes, rebate = self.converged_incomes(schedule)
        taxes = _kernels.tax_due_many(schedule.thresholds, schedule.rates,
                                      incomes)
        post = incomes - taxes + rebate
        labor = incomes / np.where(self.skills > 0, self.skills, 1.0)
        utilities = isoelastic_utility(post, labor, self.params)
        return float(np.sum(self.weights.array * utilities))

    def perturb(self, schedule, bracket, dtau, rebate_mode="fixed"):
        """Baseline vs one-bracket-shifted equilibria.

        rebate_mode "fixed" holds the baseline rebate while labor re-solves
        (isolates the price response); "equilibrium" re-converges the
        rebate under the shifted schedule.
        """
        if rebate_mode not in REBATE_MODES:
            raise ValueError("rebate_mode must be one of %s, got %r"
                             % (REBATE_MODES, rebate_mode))
        if dtau == 0.0:
            raise ValueError("dtau must be nonzero")
        base_incomes, base_rebate = self.converged_incomes(schedule)
        rates = list(schedule.rates)
        rates[bracket] = rates[bracket] + dtau
        shifted = TaxSchedule(thresholds=schedule.thresholds,
                              rates=tuple(rates),
                              rate_min=schedule.rate_min,
                              rate_max=schedule.rate_max)
        if rebate_mode == "fixed":
            _, pert_incomes = self.labor_and_incomes(shifted, base_rebate)
        else:
            pert_incomes, _ = self.converged_incomes(shifted)
        return PerturbationRun(
            baseline_schedule=schedule,
            baseline_incomes=tuple(base_incomes),
            perturbed_schedule=shifted,
            perturbed_incomes=tuple(pert_incomes),
            bracket=bracket, dtau=float(dtau))


class FixedLaborEconomy:
    """Perfectly inelastic variant: everyone works the same fixed hours no
    matter the schedule. Useful as a solver oracle (pure redistribution,
    zero distortion) and for inelastic ablations."""

    def __init__(self, skills, labor, params, weight_floor=1e-6):
        skills = np.asarray(skills, dtype=np.float64).ravel()
        if skills.size == 0:
            raise ValueError("need at least one worker")
        if labor < 0:
            raise ValueError("labor must be >= 0")
        self.skills = skills
        self.labor = float(labor)
        self.params = params
        self.incomes = skills * self.labor
        self.weights = WelfareWeights.from_incomes(self.incomes,
                                                   floor=weight_floor)

    def converged_incomes(self, schedule):
        taxes = _kernels.tax_due_many(schedule.thresholds, schedule.rates,
                                      self.incomes)
        return self.incomes.copy(), float(taxes.sum()) / self.skills.size

    def swf(self, schedule):
        incomes, rebate = self.converged_incomes(schedule)
        taxes = _kernels.tax_due_many(schedule.thresholds, schedule.rates,
                                      incomes)
        post = incomes - taxes + rebate
        utilities = isoelastic_utility(post, np.full_like(incomes, self.labor),
                                       self.params)
        return float(np.sum(self.weights.array * utilities))

    def perturb(self, schedule, bracket, dtau, rebate_mode="fixed"):
        if dtau == 0.0:
            raise ValueError("dtau must be nonzero")
        rates = list(schedule.rates)
        rates[bracket] = rates[bracket] + dtau
        shifted = TaxSchedule(thresholds=schedule.thresholds,
                              rates=tuple(rates),
                              rate_min=schedule.rate_min,
                              rate_max=schedule.rate_max)
        incomes = tuple(self.incomes)
        return PerturbationRun(
            baseline_schedule=schedule, baseline_incomes=incomes,
            perturbed_schedule=shifted, perturbed_incomes=incomes,
            bracket=bracket, dtau=float(dtau))


def estimate_elasticity(run, bracket=None):
    """Arc elasticity of bracket income to the net-of-tax rate.

    Workers are tracked by their baseline bracket, so the same people are
    averaged on both sides. Empty bracket → None (no estimate).
    """
    j = run.bracket if bracket is None else bracket
    if j != run.bracket:
        raise ValueError("run perturbs bracket %d, asked about %d"
                         % (run.bracket, j))
    schedule = run.baseline_schedule
    tau = schedule.rates[j]
    if run.dtau == 0.0:
        raise ValueError("dtau must be nonzero")
    if 1.0 - tau <= 0.0 or 1.0 - tau - run.dtau <= 0.0:
        raise ValueError("net-of-tax rate must stay positive")
    z_base = np.asarray(run.baseline_incomes)
    z_pert = np.asarray(run.perturbed_incomes)
    lo = schedule.thresholds[j]
    hi = (schedule.thresholds[j + 1]
          if j + 1 < schedule.n_brackets else math.inf)
    members = (z_base >= lo) & (z_base < hi)
    if not np.any(members):
        return None
    mean_base = float(z_base[members].mean())
    mean_pert = float(z_pert[members].mean())
    if mean_pert == mean_base:
        return 0.0
    if mean_base <= 0.0 or mean_pert <= 0.0:
        return None
    d_log_income = math.log(mean_pert) - math.log(mean_base)
    d_log_net = math.log(1.0 - tau - run.dtau) - math.log(1.0 - tau)
    return d_log_income / d_log_net
