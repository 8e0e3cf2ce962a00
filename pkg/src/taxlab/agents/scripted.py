"""Scripted (non-LLM) decision rules: exact best response, the two-threshold
satisfaction verdict, and own-utility voting."""

from .. import _kernels
from ..fiscal import isoelastic_utility, tax_due


def _check_bounds(labor_bounds):
    lo, hi = float(labor_bounds[0]), float(labor_bounds[1])
    if not (0.0 <= lo < hi <= 100.0):
        raise ValueError("labor bounds must satisfy 0 <= lo < hi <= 100, got %r"
                         % (labor_bounds,))
    return lo, hi


def rational_best_response(skill, schedule, rebate_guess, params,
                           labor_bounds=(0.0, 100.0)):
    """Utility-maximizing weekly hours for one worker.

    The objective is piecewise-smooth with kinks where income crosses a
    bracket threshold, so each bracket's labor interval is searched by
    golden section and the kinks themselves enter the candidate set. Flat
    stretches resolve toward smaller hours.
    """
    lo, hi = _check_bounds(labor_bounds)
    return _kernels.best_response(
        float(skill), schedule.thresholds, schedule.rates, float(rebate_guess),
        params.eta, params.psi, params.delta, lo, hi)


def satisfaction_flag_scripted(obs, persona):
    """1 iff the worker keeps enough of the next dollar and the overall
    bite stays under the persona's cap, else 0."""
    if obs.pre_tax < 0:
        raise ValueError("pre_tax must be >= 0")
    retention = 1.0 - obs.marginal_rate_at_income
    tax = obs.pre_tax - obs.post_tax + obs.rebate
    effective = tax / obs.pre_tax if obs.pre_tax > 0 else 0.0
    keeps_enough = retention >= persona.min_retention
    bite_ok = effective <= persona.max_effective_rate
    return 1 if (keeps_enough and bite_ok) else 0


def cast_vote_scripted(skill, platforms, rebate_guess, params,
                       labor_bounds=(0.0, 100.0)):
    """Vote for the platform maximizing the worker's own best-response
    utility, holding the rebate fixed at its current value.

    Platforms are ordered with the incumbent first; ties resolve toward
    the earliest platform, hence toward the incumbent.
    """
    if len(platforms) < 2:
        raise ValueError("need at least 2 platforms, got %d" % (len(platforms),))
    best_idx = 0
    best_utility = None
    for idx, platform in enumerate(platforms):
        schedule = platform.proposed_schedule
        labor = rational_best_response(skill, schedule, rebate_guess, params,
                                       labor_bounds)
        income = float(skill) * labor
        post = income - tax_due(schedule, income) + float(rebate_guess)
        utility = float(isoelastic_utility(post, labor, params))
        if best_utility is None or utility > best_utility:
            best_idx = idx
            best_utility = utility
    return platforms[best_idx].candidate_id
