"""The simulation loop: daily worker moves under a schedule the planner
revises on a slower clock, with optional year-end elections.

Step body, in order: dissatisfaction-penalty recalibration at year
boundaries, election (DEMOCRATIC, year boundaries), planner update (on
its own period, including step 0), simultaneous worker labor choices
against the previous step's rebate, taxation with full redistribution,
utilities and welfare, then one STEP record. All randomness flows from
the config seed, so a (config, seed) pair fully determines the log.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

import taxlab

from .. import _kernels
from ..agents import (
    PlannerObservation,
    ReplayBuffer,
    WorkerObservation,
    buffer_update,
    candidate_platform,
    cast_vote_scripted,
    planner_propose,
    satisfaction_flag_scripted,
    worker_decide_llm,
)
from ..fiscal import (
    apply_delta,
    apply_taxes,
    isoelastic_utility,
    marginal_rate,
    social_welfare,
)
from ..gateway import Gateway, GatewayConfig, MockPolicy
from ..population import (
    Gb2Params,
    assign_personas,
    gb2_sample,
    load_income_csv,
    load_personas,
    skills_from_incomes,
)
from . import events
from .config import SimConfig
from .metrics import HISTOGRAM_BINS, summarize

BUDGET_RTOL = 1e-9


@dataclass
class WorkerState:
    worker_id: int
    skill: float
    persona: object
    labor: float = 0.0
    pre_tax: float = 0.0
    post_tax: float = 0.0
    utility: float = 0.0
    satisfied: int = 1
    history: tuple = ()
    phi: float = 0.0
    seq: int = 0


@dataclass
class SimState:
    config: SimConfig
    schedule: object
    workers: list
    buffer: ReplayBuffer
    log: events.EventLog
    t: int = 0
    rebate: float = 0.0
    period_swfs: list = field(default_factory=list)
    swf_lo: float = None
    swf_hi: float = None
    planner_seq: int = 0
    record_seq: int = 0
    actions: int = 0

    @property
    def tax_year(self):
        return self.t // self.config.steps_per_year

    @property
    def phase(self):
        switch = self.config.phase_switch_fraction * self.config.total_steps
        return "EXPLORE" if self.t < switch else "EXPLOIT"

    @property
    def swf_bounds(self):
        if self.swf_lo is None or self.swf_hi is None:
            return None
        return (self.swf_lo, self.swf_hi)

    def next_seq(self):
        seq = self.record_seq
        self.record_seq += 1
        return seq


def build_state(config):
    """Sample the population and write the log header."""
    skills = _sample_skills(config)
    personas = assign_personas(config.n_workers, load_personas(), config.seed)
    phi0 = 0.0 if config.phi_auto else config.phi
    workers = [
        WorkerState(worker_id=i, skill=float(skills[i]), persona=personas[i],
                    phi=phi0)
        for i in range(config.n_workers)
    ]
    log = events.EventLog()
    state = SimState(config=config, schedule=config.initial_schedule(),
                     workers=workers, buffer=ReplayBuffer(
                         capacity=config.buffer_capacity),
                     log=log)
    log.append(events.header_record(state.next_seq(), config.to_dict(),
                                    taxlab.__version__))
    return state


def _sample_skills(config):
    if config.skill_source == "explicit":
        return np.asarray(config.explicit_skills, dtype=float)
    if config.skill_source == "csv":
        incomes = load_income_csv(config.skills_csv)
    else:
        incomes = gb2_sample(Gb2Params(*config.gb2_params), config.n_workers,
                             seed=config.seed)
    profiles = skills_from_incomes(incomes,
                                   reference_hours=config.reference_hours)
    return np.asarray([p.skill for p in profiles])


def make_gateway(config, transcript_path=None):
    """Gateway for LLM-backed policies; None when nothing needs one."""
    if config.worker_policy != "llm" and config.planner_policy != "llm":
        return None
    gateway_config = GatewayConfig(
        backend=config.backend, base_url=config.gateway_url,
        model=config.gateway_model, timeout=config.gateway_timeout,
        max_retries=config.gateway_max_retries,
        max_in_flight=config.gateway_max_in_flight)
    policy = None
    if config.backend == "MOCK":
        policy = MockPolicy(mode=config.mock_mode, seed=config.seed,
                            noise_scale=config.mock_noise_scale,
                            script=config.mock_script,
                            malformed_every=config.mock_malformed_every)
    return Gateway(gateway_config, mock_policy=policy,
                   transcript_path=transcript_path)


def _recalibrate_phi(state):
    """Yearly reset: the penalty is half the utility a worker just earned."""
    config = state.config
    if config.scenario != "BOUNDED" or not config.phi_auto:
        return
    params = config.utility_params(phi=0.0)
    for worker in state.workers:
        base = isoelastic_utility(worker.post_tax, worker.labor, params)
        worker.phi = 0.5 * abs(float(base))


def run_election(state, gateway=None):
    """Year-boundary majority vote between the incumbent schedule and a
    seeded challenger platform; ties retain the incumbent. A challenger
    win installs its platform and wipes the planner's replay buffer."""
    config = state.config
    year = state.tax_year
    challenger_seed = (config.seed * 1_000_003 + 7_919 * year) % 2 ** 63
    incumbent = candidate_platform(
        "INCUMBENT", state.schedule, candidate_id="incumbent",
        gateway=gateway)
    challenger = candidate_platform(
        "CHALLENGER", state.schedule, candidate_id="challenger-y%d" % year,
        seed=challenger_seed, gateway=gateway)
    platforms = (incumbent, challenger)
    params = config.utility_params()
    votes = [
        cast_vote_scripted(worker.skill, platforms, state.rebate, params,
                           config.labor_bounds)
        for worker in state.workers
    ]
    state.actions += len(votes)
    tally = {}
    for vote in votes:
        tally[vote] = tally.get(vote, 0) + 1
    top = max(tally.values())
    leaders = [p.candidate_id for p in platforms if tally.get(
        p.candidate_id, 0) == top]
    winner = leaders[0]
    challenger_won = winner == challenger.candidate_id
    state.log.append(events.election_record(
        state.next_seq(), state.t, year, platforms, votes, winner,
        challenger_won))
    if challenger_won:
        state.schedule = challenger.proposed_schedule
        state.buffer = ReplayBuffer(capacity=config.buffer_capacity)
        # The ousted planner's unfinished period dies with it; the new
        # planner starts with no realized credit.
        state.period_swfs = []
    return challenger_won


def _worker_histograms(state):
    pre = np.asarray([w.pre_tax for w in state.workers])
    utils = np.asarray([w.utility for w in state.workers])
    income_hist, _ = np.histogram(
        pre, bins=HISTOGRAM_BINS, range=(0.0, max(float(pre.max()), 1.0)))
    span = float(utils.max() - utils.min())
    utility_hist, _ = np.histogram(
        utils, bins=HISTOGRAM_BINS,
        range=(float(utils.min()), float(utils.min()) + max(span, 1.0)))
    return tuple(int(c) for c in income_hist), tuple(int(c) for c in
                                                     utility_hist)


def planner_update(state, gateway):
    """Credit the period that just ended to the buffer, then let the
    planner shift the schedule. Attempt counts advance the planner's
    request sequence so mock cadences stay per-agent."""
    config = state.config
    period_swf = None
    if state.period_swfs:
        period_swf = float(np.mean(state.period_swfs))
        state.buffer = buffer_update(state.buffer, state.schedule, period_swf)
    state.period_swfs = []
    income_hist, utility_hist = _worker_histograms(state)
    obs = PlannerObservation(
        income_histogram=income_hist, utility_histogram=utility_hist,
        swf_moving_average=0.0 if period_swf is None else period_swf,
        best_trajectories=state.buffer.entries)
    best = state.buffer.best if state.buffer.entries else None
    digest = {
        "arity": state.schedule.n_brackets,
        "phase": state.phase,
        "current_rates": list(state.schedule.rates),
        "best_rates": None if best is None else list(best[0].rates),
    }
    outcome = planner_propose(
        obs, state.buffer, state.phase, gateway,
        current_schedule=state.schedule, variant=config.prompt_variant,
        request_id="planner-t%06d" % state.t, seq=state.planner_seq,
        digest=digest, swf_bounds=state.swf_bounds)
    state.planner_seq += outcome.attempts
    state.actions += 1
    old = state.schedule
    state.schedule = apply_delta(old, outcome.delta)
    state.log.append(events.policy_record(
        state.next_seq(), state.t, state.tax_year, old, state.schedule,
        outcome.delta, state.phase, outcome.attempts, outcome.parse_failed,
        period_swf, None if best is None else best[1]))
    if outcome.parse_failed:
        state.log.append(events.parse_failure_record(
            state.next_seq(), state.t, state.tax_year, "planner",
            outcome.raw_text,
            "no usable DELTA after %d attempts" % outcome.attempts))


def _decide_labor_rational(state):
    config = state.config
    skills = np.asarray([w.skill for w in state.workers])
    labor = _kernels.best_response_many(
        skills, state.schedule.thresholds, state.schedule.rates, state.rebate,
        config.eta, config.psi, config.delta, *config.labor_bounds)
    state.actions += len(state.workers)
    return np.asarray(labor), []


def _decide_labor_llm(state, gateway):
    config = state.config
    schedule = state.schedule
    include_satisfied = config.scenario == "BOUNDED"

    def decide(worker):
        obs = WorkerObservation(
            pre_tax=worker.pre_tax, post_tax=worker.post_tax,
            marginal_rate_at_income=marginal_rate(schedule, worker.pre_tax),
            rebate=state.rebate,
            history=worker.history[-config.history_window:],
            window=config.history_window, satisfied=worker.satisfied)
        digest = {
            "skill": worker.skill,
            "thresholds": list(schedule.thresholds),
            "rates": list(schedule.rates),
            "rebate": state.rebate,
            "eta": config.eta, "psi": config.psi, "delta": config.delta,
            "labor_lo": config.labor_bounds[0],
            "labor_hi": config.labor_bounds[1],
        }
        return worker_decide_llm(
            obs, worker.persona, state.phase, gateway,
            prev_labor=worker.labor, labor_bounds=config.labor_bounds,
            variant=config.prompt_variant,
            request_id="worker-%03d-t%06d" % (worker.worker_id, state.t),
            seq=worker.seq, digest=digest,
            include_satisfied=include_satisfied)

    if config.backend == "HTTP" and config.gateway_max_in_flight > 1:
        with ThreadPoolExecutor(
                max_workers=config.gateway_max_in_flight) as pool:
            outcomes = list(pool.map(decide, state.workers))
    else:
        outcomes = [decide(worker) for worker in state.workers]

    failures = []
    labor = np.empty(len(state.workers))
    for i, (worker, outcome) in enumerate(zip(state.workers, outcomes)):
        worker.seq += outcome.attempts
        labor[i] = outcome.labor
        if outcome.parse_failed:
            failures.append((
                "worker-%d" % worker.worker_id, outcome.raw_text,
                "no usable LABOR after %d attempts" % outcome.attempts))
    state.actions += len(state.workers)
    return labor, failures


def step(state, gateway=None):
    """One loop body; returns the state it mutated."""
    config = state.config
    t = state.t
    if t >= config.total_steps:
        raise ValueError("step %d is past the end of the run (%d steps)"
                         % (t, config.total_steps))
    year_boundary = t > 0 and t % config.steps_per_year == 0
    if year_boundary:
        _recalibrate_phi(state)
    challenger_won = False
    if year_boundary and config.governance == "DEMOCRATIC":
        challenger_won = run_election(state, gateway)
    if config.planner_policy == "llm" and t % config.update_period == 0 \
            and not challenger_won:
        planner_update(state, gateway)

    if config.worker_policy == "rational":
        labor, failures = _decide_labor_rational(state)
    else:
        labor, failures = _decide_labor_llm(state, gateway)
    for agent, raw_text, error in failures:
        state.log.append(events.parse_failure_record(
            state.next_seq(), t, state.tax_year, agent, raw_text, error))

    skills = np.asarray([w.skill for w in state.workers])
    pre_tax = skills * labor
    post_tax, total_tax, rebate = apply_taxes(state.schedule, pre_tax)
    residual = abs(float(post_tax.sum() - pre_tax.sum()))
    if residual > BUDGET_RTOL * max(1.0, float(pre_tax.sum())):
        raise RuntimeError("budget out of balance at step %d: residual %r"
                           % (t, residual))

    params = config.utility_params(phi=0.0)
    base_utility = np.asarray(isoelastic_utility(post_tax, labor, params))
    if config.scenario == "BOUNDED":
        satisfied = np.empty(len(state.workers), dtype=int)
        for i, worker in enumerate(state.workers):
            obs = WorkerObservation(
                pre_tax=float(pre_tax[i]), post_tax=float(post_tax[i]),
                marginal_rate_at_income=marginal_rate(
                    state.schedule, float(pre_tax[i])),
                rebate=rebate, satisfied=worker.satisfied)
            satisfied[i] = satisfaction_flag_scripted(obs, worker.persona)
        phi = np.asarray([w.phi for w in state.workers])
        utilities = base_utility - (1 - satisfied) * phi
    else:
        satisfied = np.ones(len(state.workers), dtype=int)
        utilities = base_utility

    swf = social_welfare(pre_tax, utilities)
    state.log.append(events.step_record(
        state.next_seq(), t, state.tax_year, state.schedule, labor, pre_tax,
        post_tax, utilities, satisfied, rebate, total_tax, swf))

    for i, worker in enumerate(state.workers):
        worker.labor = float(labor[i])
        worker.pre_tax = float(pre_tax[i])
        worker.post_tax = float(post_tax[i])
        worker.utility = float(utilities[i])
        worker.satisfied = int(satisfied[i])
        history = worker.history + ((worker.labor, worker.utility),)
        worker.history = history[-config.history_window:]
    state.rebate = rebate
    state.period_swfs.append(swf)
    state.swf_lo = swf if state.swf_lo is None else min(state.swf_lo, swf)
    state.swf_hi = swf if state.swf_hi is None else max(state.swf_hi, swf)
    state.t = t + 1
    return state


@dataclass(frozen=True)
class RunResult:
    log: events.EventLog
    summary: object
    throughput: dict


def run_simulation(config, gateway=None, transcript_path=None):
    """Run the configured simulation to completion."""
    if gateway is None:
        gateway = make_gateway(config, transcript_path=transcript_path)
    state = build_state(config)
    started = time.perf_counter()
    while state.t < config.total_steps:
        step(state, gateway)
    elapsed = max(time.perf_counter() - started, 1e-9)
    throughput = {
        "wall_seconds": elapsed,
        "steps_per_sec": config.total_steps / elapsed,
        "actions_per_sec": state.actions / elapsed,
        "actions": state.actions,
    }
    summary = summarize(state.log, convergence_tol=config.convergence_tol)
    return RunResult(log=state.log, summary=summary, throughput=throughput)
