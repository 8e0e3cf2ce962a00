"""Schedule arithmetic, preferences, and the per-step fiscal identity.

Money is float64 dollars throughout; no rounding to cents anywhere in the
pipeline. Labor is weekly hours, income is skill times labor, and everything
collected in a step is returned to workers as an equal lump-sum rebate, so
aggregate post-tax income always equals aggregate pre-tax income.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels

DELTA_CLIP_PP = 20.0
INCOME_FLOOR = 1e-6
CONSUMPTION_FLOOR = 1e-6


@dataclass(frozen=True)
class TaxSchedule:
    """Piecewise-linear marginal schedule: rates[j] applies to income in
    [thresholds[j], thresholds[j+1]), with the top bracket unbounded."""

    thresholds: tuple
    rates: tuple
    rate_min: float = 0.0
    rate_max: float = 0.99

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if len(self.thresholds) == 0:
            raise ValueError("schedule needs at least one bracket")
        if len(self.thresholds) != len(self.rates):
            raise ValueError(
                "got %d thresholds but %d rates" % (len(self.thresholds), len(self.rates)))
        if self.thresholds[0] != 0.0:
            raise ValueError("first threshold must be 0, got %r" % (self.thresholds[0],))
        for a, b in zip(self.thresholds, self.thresholds[1:]):
            if not b > a:
                raise ValueError("thresholds must be strictly increasing")
        if not self.rate_min <= self.rate_max:
            raise ValueError("rate_min above rate_max")
        for r in self.rates:
            if not (self.rate_min <= r <= self.rate_max):
                raise ValueError(
                    "rate %r outside [%r, %r]" % (r, self.rate_min, self.rate_max))

    @property
    def n_brackets(self):
        return len(self.thresholds)

    def bracket_of(self, income):
        """Index of the bracket containing `income` (right-continuous: an
        income exactly at a threshold belongs to the bracket above)."""
        if income < 0:
            raise ValueError("income must be nonnegative, got %r" % (income,))
        idx = 0
        for j, lower in enumerate(self.thresholds):
            if income >= lower:
                idx = j
        return idx

    def to_dict(self):
        return {
            "thresholds": list(self.thresholds),
            "rates": list(self.rates),
            "rate_min": self.rate_min,
            "rate_max": self.rate_max,
        }

    @classmethod
    def from_dict(cls, payload):
        if "thresholds" not in payload or "rates" not in payload:
            raise ValueError("schedule JSON needs 'thresholds' and 'rates'")
        return cls(
            thresholds=tuple(payload["thresholds"]),
            rates=tuple(payload["rates"]),
            rate_min=float(payload.get("rate_min", 0.0)),
            rate_max=float(payload.get("rate_max", 0.99)),
        )


# 2024 U.S. federal single-filer brackets, and the coarse three-bracket
# variant used for small solver economies.
US_FEDERAL_2024 = TaxSchedule(
    thresholds=(0.0, 11600.0, 47150.0, 100525.0, 191950.0, 243725.0, 609350.0),
    rates=(0.10, 0.12, 0.22, 0.24, 0.32, 0.35, 0.37),
)
THREE_BRACKET = TaxSchedule(
    thresholds=(0.0, 90000.0, 160000.0),
    rates=(0.10, 0.22, 0.32),
)


def tax_due(schedule, income):
    """Total tax on one income, accumulated slab by slab."""
    if income < 0:
        raise ValueError("income must be nonnegative, got %r" % (income,))
    total = 0.0
    for j, (lower, rate) in enumerate(zip(schedule.thresholds, schedule.rates)):
        upper = schedule.thresholds[j + 1] if j + 1 < schedule.n_brackets else math.inf
        total += rate * max(0.0, min(income, upper) - lower)
    return total


def marginal_rate(schedule, income):
    return schedule.rates[schedule.bracket_of(income)]


def apply_taxes(schedule, incomes):
    """Tax every income and recycle the proceeds as an equal rebate.

    Returns (post_tax array, total_tax, rebate). Budget balance is exact by
    construction: sum(post_tax) == sum(incomes) up to float roundoff.
    """
    z = np.asarray(incomes, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("incomes must be a nonempty 1-d array")
    if np.any(z < 0):
        raise ValueError("incomes must be nonnegative")
    taxes = _kernels.tax_due_many(schedule.thresholds, schedule.rates, z)
    total_tax = float(np.sum(taxes))
    rebate = total_tax / z.size
    post = z - taxes + rebate
    return post, total_tax, rebate


def apply_delta(schedule, deltas_pp):
    """Planner update: per-bracket changes in percentage points, clipped to
    +/-DELTA_CLIP_PP, then rates clamped into [rate_min, rate_max]."""
    if len(deltas_pp) != schedule.n_brackets:
        raise ValueError(
            "expected %d deltas, got %d" % (schedule.n_brackets, len(deltas_pp)))
    new_rates = []
    for rate, d in zip(schedule.rates, deltas_pp):
        d = float(d)
        if not math.isfinite(d):
            raise ValueError("delta must be finite, got %r" % (d,))
        d = max(-DELTA_CLIP_PP, min(DELTA_CLIP_PP, d))
        new_rates.append(
            max(schedule.rate_min, min(schedule.rate_max, rate + d / 100.0)))
    return replace(schedule, rates=tuple(new_rates))


@dataclass(frozen=True)
class UtilityParams:
    """Isoelastic consumption utility with power labor disutility, plus the
    flat dissatisfaction penalty used in the bounded variant."""

    eta: float = 0.5
    psi: float = 0.01
    delta: float = 2.0
    phi: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0, got %r" % (self.eta,))
        if self.eta == 1.0:
            raise ValueError("eta = 1 is outside this utility family (log case)")
        if self.psi < 0:
            raise ValueError("psi must be >= 0, got %r" % (self.psi,))
        if not self.delta > 1.0:
            raise ValueError("delta must be > 1, got %r" % (self.delta,))
        if self.phi < 0:
            raise ValueError("phi must be >= 0, got %r" % (self.phi,))


def isoelastic_utility(post_tax, labor, params):
    """(c^(1-eta) - 1)/(1-eta) - psi * l^delta, with consumption clamped to
    a tiny positive floor before exponentiation. Accepts arrays."""
    c = np.maximum(np.asarray(post_tax, dtype=np.float64), CONSUMPTION_FLOOR)
    l = np.asarray(labor, dtype=np.float64)
    if np.any(l < 0):
        raise ValueError("labor must be nonnegative")
    out = (np.power(c, 1.0 - params.eta) - 1.0) / (1.0 - params.eta) \
        - params.psi * np.power(l, params.delta)
    if out.ndim == 0:
        return float(out)
    return out


def bounded_utility(post_tax, labor, satisfied, params):
    """Isoelastic utility minus phi when the satisfaction flag is off."""
    sat = np.asarray(satisfied)
    if not np.all((sat == 0) | (sat == 1)):
        raise ValueError("satisfied must be 0/1")
    out = isoelastic_utility(post_tax, labor, params) \
        - (1.0 - np.asarray(sat, dtype=np.float64)) * params.phi
    if np.ndim(out) == 0:
        return float(out)
    return out


def social_welfare(incomes, utilities, income_floor=INCOME_FLOOR):
    """Sum of utilities weighted by 1/max(pre-tax income, floor)."""
    z = np.asarray(incomes, dtype=np.float64)
    u = np.asarray(utilities, dtype=np.float64)
    if z.shape != u.shape or z.ndim != 1 or z.size == 0:
        raise ValueError("incomes and utilities must be equal-length 1-d arrays")
    if income_floor <= 0:
        raise ValueError("income_floor must be positive")
    return float(np.sum(u / np.maximum(z, income_floor)))


@dataclass(frozen=True)
class EconomySnapshot:
    """One step's fiscal state, as produced by the engine."""

    step: int
    tax_year: int
    pre_tax: np.ndarray = field(repr=False)
    post_tax: np.ndarray = field(repr=False)
    total_tax: float = 0.0
    rebate: float = 0.0
    swf: float = 0.0
