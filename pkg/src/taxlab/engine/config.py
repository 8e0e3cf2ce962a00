"""Run configuration: one flat, validated record that pins a simulation.

Every knob lives in a single frozen dataclass so a run is reproducible
from its JSON snapshot alone. `from_dict` rejects unknown keys with the
offending field named, which keeps config drift loud.
"""

import dataclasses
import json
from dataclasses import dataclass, fields

from ..fiscal import TaxSchedule, UtilityParams

SCENARIOS = ("ISOELASTIC", "BOUNDED")
GOVERNANCE_MODES = ("FIXED", "DEMOCRATIC")
BACKENDS = ("MOCK", "HTTP")
WORKER_POLICIES = ("rational", "llm")
PLANNER_POLICIES = ("llm", "hold")
SKILL_SOURCES = ("gb2", "csv", "explicit")
PROMPT_VARIANTS = ("FULL", "NO_EXPLORE", "NO_EXPLOIT")
MOCK_MODES = ("RATIONAL_ECHO", "NOISY", "SCRIPT", "MALFORMED_EVERY_N")

_TUPLE_FIELDS = ("labor_bounds", "thresholds", "initial_rates", "gb2_params",
                 "explicit_skills", "mock_script")


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulation run depends on, in one hashable record."""

    n_workers: int = 100
    total_steps: int = 3000
    steps_per_year: int = 128
    # 0 means "once per tax year", the default planner cadence.
    planner_update_period: int = 0
    buffer_capacity: int = 5
    labor_bounds: tuple = (0.0, 100.0)
    thresholds: tuple = (0.0,)
    initial_rates: tuple = (0.0,)
    rate_min: float = 0.0
    rate_max: float = 0.99
    scenario: str = "ISOELASTIC"
    governance: str = "FIXED"
    backend: str = "MOCK"
    seed: int = 0
    eta: float = 0.5
    psi: float = 0.01
    delta: float = 2.0
    # phi_auto recalibrates the dissatisfaction penalty each tax year from
    # each worker's realized utility; phi is the fixed value otherwise.
    phi: float = 0.0
    phi_auto: bool = True
    history_window: int = 10
    phase_switch_fraction: float = 0.5
    worker_policy: str = "rational"
    planner_policy: str = "llm"
    skill_source: str = "gb2"
    gb2_params: tuple = (2.2, 52000.0, 0.9, 1.4)
    skills_csv: str = ""
    explicit_skills: tuple = ()
    reference_hours: float = 2080.0
    mock_mode: str = "RATIONAL_ECHO"
    mock_noise_scale: float = 2.0
    mock_script: tuple = ()
    mock_malformed_every: int = 3
    gateway_url: str = ""
    gateway_model: str = "mock-model"
    gateway_timeout: float = 30.0
    gateway_max_retries: int = 3
    gateway_max_in_flight: int = 8
    convergence_tol: float = 1e-3
    prompt_variant: str = "FULL"

    def __post_init__(self):
        for name in _TUPLE_FIELDS:
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1, got %d" % self.n_workers)
        if self.steps_per_year < 1:
            raise ValueError("steps_per_year must be >= 1, got %d"
                             % self.steps_per_year)
        if self.total_steps < self.steps_per_year:
            raise ValueError(
                "total_steps (%d) must cover at least one tax year (%d steps)"
                % (self.total_steps, self.steps_per_year))
        period = self.update_period
        if not 1 <= period <= self.steps_per_year:
            raise ValueError(
                "planner_update_period (%d) must be in [1, steps_per_year=%d]"
                % (period, self.steps_per_year))
        if self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1, got %d"
                             % self.buffer_capacity)
        lo, hi = self.labor_bounds
        if not (0.0 <= lo < hi <= 100.0):
            raise ValueError("labor_bounds must satisfy 0 <= lo < hi <= 100, "
                             "got %r" % (self.labor_bounds,))
        if not 0.0 <= self.phase_switch_fraction <= 1.0:
            raise ValueError("phase_switch_fraction must be in [0, 1], got %r"
                             % (self.phase_switch_fraction,))
        _check_choice("scenario", self.scenario, SCENARIOS)
        _check_choice("governance", self.governance, GOVERNANCE_MODES)
        _check_choice("backend", self.backend, BACKENDS)
        _check_choice("worker_policy", self.worker_policy, WORKER_POLICIES)
        _check_choice("planner_policy", self.planner_policy, PLANNER_POLICIES)
        _check_choice("skill_source", self.skill_source, SKILL_SOURCES)
        _check_choice("prompt_variant", self.prompt_variant, PROMPT_VARIANTS)
        _check_choice("mock_mode", self.mock_mode, MOCK_MODES)
        if self.skill_source == "csv" and not self.skills_csv:
            raise ValueError("skill_source 'csv' requires skills_csv")
        if self.skill_source == "explicit" and not self.explicit_skills:
            raise ValueError("skill_source 'explicit' requires explicit_skills")
        if self.skill_source == "explicit" \
                and len(self.explicit_skills) != self.n_workers:
            raise ValueError("explicit_skills has %d entries for %d workers"
                             % (len(self.explicit_skills), self.n_workers))
        if self.history_window < 1:
            raise ValueError("history_window must be >= 1, got %d"
                             % self.history_window)
        if self.convergence_tol <= 0.0:
            raise ValueError("convergence_tol must be positive, got %r"
                             % (self.convergence_tol,))
        if self.phi < 0.0:
            raise ValueError("phi must be >= 0, got %r" % (self.phi,))
        # Constructing these validates the bracket and utility fields.
        self.initial_schedule()
        self.utility_params()

    @property
    def update_period(self):
        if self.planner_update_period == 0:
            return self.steps_per_year
        return self.planner_update_period

    @property
    def n_years(self):
        return self.total_steps // self.steps_per_year

    def initial_schedule(self):
        return TaxSchedule(thresholds=self.thresholds,
                           rates=self.initial_rates,
                           rate_min=self.rate_min, rate_max=self.rate_max)

    def utility_params(self, phi=None):
        return UtilityParams(eta=self.eta, psi=self.psi, delta=self.delta,
                             phi=self.phi if phi is None else phi)

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError("unknown config field(s) %s; valid fields: %s"
                             % (", ".join(unknown), ", ".join(sorted(known))))
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def with_overrides(self, overrides):
        """Apply {field: value} overrides, re-running all validation."""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ValueError("unknown override field(s) %s; valid fields: %s"
                             % (", ".join(unknown), ", ".join(sorted(known))))
        return dataclasses.replace(self, **overrides)


def _check_choice(name, value, choices):
    if value not in choices:
        raise ValueError("%s must be one of %s, got %r"
                         % (name, "/".join(choices), value))


def parse_override(text):
    """Parse one 'field=value' override; values are JSON with a str fallback."""
    if "=" not in text:
        raise ValueError("override must look like field=value, got %r" % text)
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError("override has an empty field name: %r" % text)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value
