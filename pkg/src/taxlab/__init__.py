"""taxlab: a two-level tax policy simulator.

A planner adjusts a piecewise-linear marginal tax schedule year by year;
heterogeneous workers respond by choosing weekly labor, either from a
scripted best response or through a chat-completion policy (real or mocked).
Companion tooling covers income-distribution calibration, optimal-rate
solvers, and an event-logged simulation engine with replay.
"""

__version__ = "0.1.0"

from .fiscal import (
    DELTA_CLIP_PP,
    EconomySnapshot,
    TaxSchedule,
    US_FEDERAL_2024,
    THREE_BRACKET,
    UtilityParams,
    apply_delta,
    apply_taxes,
    bounded_utility,
    isoelastic_utility,
    marginal_rate,
    social_welfare,
    tax_due,
)
