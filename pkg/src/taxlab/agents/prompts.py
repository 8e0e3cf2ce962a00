"""Prompt assembly from the bundled plain-text templates.

Templates live in taxlab/templates and use named placeholders; schedules
render as ``TAX=[10% 22% ...]`` and welfare shown to the planner is min-max
normalized over the run so far, so the best schedule on record reads as
SWF=1.0 regardless of scale.
"""

from importlib import resources

PHASES = ("EXPLORE", "EXPLOIT")
VARIANTS = ("FULL", "NO_EXPLORE", "NO_EXPLOIT")


def load_template(name):
    return resources.files("taxlab").joinpath("templates/%s.txt" % name).read_text()


def _check(phase, variant):
    if phase not in PHASES:
        raise ValueError("phase must be one of %s, got %r" % (PHASES, phase))
    if variant not in VARIANTS:
        raise ValueError("variant must be one of %s, got %r" % (VARIANTS, variant))


def render_tax(schedule):
    return "TAX=[%s]" % " ".join("%g%%" % (rate * 100.0) for rate in schedule.rates)


def render_history(history):
    if not history:
        return "(no weeks recorded yet)"
    return "\n".join("- (%.2f h, %.4f)" % (labor, utility)
                     for labor, utility in history)


def normalize_swf(value, lo, hi):
    """Min-max position of `value` within the run's observed [lo, hi]."""
    if hi > lo:
        return (float(value) - lo) / (hi - lo)
    return 1.0


def worker_phase_hint(history, phase, variant="FULL"):
    """Directional nudge for the worker, keyed to the last utility move."""
    _check(phase, variant)
    if phase == "EXPLORE":
        if variant == "NO_EXPLORE":
            return ""
        return ("You are still mapping your tradeoff: pick hours noticeably "
                "different from recent weeks and watch how utility responds.")
    if variant == "NO_EXPLOIT":
        return ""
    if len(history) < 2:
        return "Settle on the hours that have served you best so far."
    (labor_prev, utility_prev), (labor_last, utility_last) = history[-2], history[-1]
    d_utility = utility_last - utility_prev
    d_labor = labor_last - labor_prev
    if d_utility == 0.0 or d_labor == 0.0:
        return "Utility has flattened; stay close to %.2f hours." % labor_last
    if (d_utility > 0.0) == (d_labor > 0.0):
        return ("Your last move paid off in the direction of more work; "
                "push hours above %.2f." % labor_last)
    return ("Your last move paid off in the direction of less work; "
            "pull hours below %.2f." % labor_last)


def planner_phase_hint(phase, variant="FULL"):
    _check(phase, variant)
    if phase == "EXPLORE":
        if variant == "NO_EXPLORE":
            return ""
        return ("Much of the rate space is untested: propose rates well away "
                "from the best schedule on record and judge them by the "
                "welfare they earn.")
    if variant == "NO_EXPLOIT":
        return ""
    return ("Stop experimenting: move the rates toward the best schedule on "
            "record and hold there.")


def build_worker_prompt(obs, persona, phase, variant="FULL",
                        labor_bounds=(0.0, 100.0), include_satisfied=False):
    """(system, user) pair for one worker decision."""
    _check(phase, variant)
    system = load_template("worker_system").format(
        persona=persona.text,
        labor_lo="%g" % labor_bounds[0],
        labor_hi="%g" % labor_bounds[1])
    satisfied_line = ""
    if include_satisfied:
        verdict = "SATISFIED" if obs.satisfied else "NOT SATISFIED"
        satisfied_line = "- your latest satisfaction verdict: %s\n" % verdict
    user = load_template("worker_user").format(
        marginal_rate="%g%%" % (obs.marginal_rate_at_income * 100.0),
        pre_tax="$%.2f" % obs.pre_tax,
        post_tax="$%.2f" % obs.post_tax,
        rebate="$%.2f" % obs.rebate,
        satisfied_line=satisfied_line,
        history=render_history(obs.history),
        phase_hint=worker_phase_hint(obs.history, phase, variant))
    return system, user


def build_planner_prompt(obs, schedule, phase, variant="FULL",
                         swf_bounds=None, best=None):
    """(system, user) pair for one planner update.

    `best` is the (schedule, swf) pair to advertise; defaults to the head
    of obs.best_trajectories. swf_bounds=(lo, hi) sets the normalization.
    """
    _check(phase, variant)
    if best is None and obs.best_trajectories:
        best = obs.best_trajectories[0]
    if best is None:
        best_tax, best_swf = "(none recorded yet)", "n/a"
    else:
        best_tax = render_tax(best[0])
        if swf_bounds is not None:
            best_swf = "%.2f" % normalize_swf(best[1], *swf_bounds)
        else:
            best_swf = "%.4f" % best[1]
    system = load_template("planner_system").format(
        n_brackets=schedule.n_brackets,
        thresholds=" ".join("%g" % t for t in schedule.thresholds),
        rate_min="%g%%" % (schedule.rate_min * 100.0),
        rate_max="%g%%" % (schedule.rate_max * 100.0))
    user = load_template("planner_user").format(
        current_tax=render_tax(schedule),
        income_histogram=" ".join("%d" % c for c in obs.income_histogram),
        utility_histogram=" ".join("%.3f" % u for u in obs.utility_histogram),
        swf_ma="%.4f" % obs.swf_moving_average,
        best_tax=best_tax,
        best_swf=best_swf,
        phase_hint=planner_phase_hint(phase, variant))
    return system, user
