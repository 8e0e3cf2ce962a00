"""LLM-backed decisions: build the prompt, call the gateway, parse the
reply, clamp to the action space. Every path degrades to a safe fallback
(previous labor, zero delta, templated pitch) rather than aborting."""

from dataclasses import dataclass

import numpy as np

from ..fiscal import apply_delta
from ..gateway import ChatRequest, GatewayError
from .actions import ActionParseError, Platform, parse_action
from .buffer import ReplayBuffer
from .prompts import build_planner_prompt, build_worker_prompt, load_template, render_tax

CANDIDATE_KINDS = ("INCUMBENT", "CHALLENGER")


@dataclass(frozen=True)
class PolicyOutcome:
    """What a decision attempt produced, including how it failed."""

    kind: str
    labor: float = None
    delta: tuple = None
    attempts: int = 1
    parse_failed: bool = False
    raw_text: str = ""


def _attempt_id(request_id, attempt):
    if attempt == 1:
        return request_id
    return "%s-retry%d" % (request_id, attempt - 1)


def worker_decide_llm(obs, persona, phase, gateway, *, prev_labor,
                      labor_bounds=(0.0, 100.0), variant="FULL",
                      request_id="worker", seq=0, digest=None,
                      include_satisfied=False, max_parse_retries=3):
    """One worker decision through the gateway.

    Each attempt advances `seq` so a stateless mock can vary its reply;
    after max_parse_retries unparsable replies the worker keeps its
    previous hours and the outcome is flagged for a parse-failure event.
    """
    lo, hi = float(labor_bounds[0]), float(labor_bounds[1])
    system, user = build_worker_prompt(obs, persona, phase, variant,
                                       labor_bounds, include_satisfied)
    metadata = {"role": "worker"}
    if digest is not None:
        metadata["digest"] = dict(digest)
    last_reply = ""
    for attempt in range(1, max_parse_retries + 1):
        request = ChatRequest(
            model=gateway.config.model, system_prompt=system, user_prompt=user,
            request_id=_attempt_id(request_id, attempt),
            metadata=dict(metadata, seq=seq + attempt - 1))
        try:
            last_reply = gateway.chat(request)
        except GatewayError as exc:
            last_reply = "(gateway failure: %s)" % (exc,)
            continue
        try:
            message = parse_action(last_reply, "LABOR")
        except ActionParseError:
            continue
        labor = min(max(message.labor, lo), hi)
        return PolicyOutcome(kind="LABOR", labor=labor, attempts=attempt,
                             raw_text=last_reply)
    fallback = min(max(float(prev_labor), lo), hi)
    return PolicyOutcome(kind="LABOR", labor=fallback,
                         attempts=max_parse_retries, parse_failed=True,
                         raw_text=last_reply)


def planner_propose(obs, buffer, phase, gateway, *, current_schedule,
                    variant="FULL", request_id="planner", seq=0, digest=None,
                    swf_bounds=None, max_parse_retries=3):
    """One planner update through the gateway.

    The advertised best (schedule, swf) comes from the replay buffer.
    Unparsable after retries → zero delta, flagged for a parse-failure
    event. Parsed deltas are clipped to ±20 points per bracket.
    """
    arity = current_schedule.n_brackets
    best = buffer.best if buffer.entries else None
    system, user = build_planner_prompt(obs, current_schedule, phase, variant,
                                        swf_bounds=swf_bounds, best=best)
    metadata = {"role": "planner"}
    if digest is not None:
        metadata["digest"] = dict(digest)
    last_reply = ""
    for attempt in range(1, max_parse_retries + 1):
        request = ChatRequest(
            model=gateway.config.model, system_prompt=system, user_prompt=user,
            request_id=_attempt_id(request_id, attempt),
            metadata=dict(metadata, seq=seq + attempt - 1))
        try:
            last_reply = gateway.chat(request)
        except GatewayError as exc:
            last_reply = "(gateway failure: %s)" % (exc,)
            continue
        try:
            message = parse_action(last_reply, "DELTA", arity=arity)
        except ActionParseError:
            continue
        delta = tuple(float(np.clip(d, -20.0, 20.0)) for d in message.delta)
        return PolicyOutcome(kind="DELTA", delta=delta, attempts=attempt,
                             raw_text=last_reply)
    return PolicyOutcome(kind="DELTA", delta=(0.0,) * arity,
                         attempts=max_parse_retries, parse_failed=True,
                         raw_text=last_reply)


def candidate_platform(candidate_kind, current_schedule, *, candidate_id,
                       seed=0, gateway=None):
    """Election platform for one candidate.

    The incumbent runs on the current schedule; the challenger runs on a
    seeded random shift of it (each bracket uniform in ±20 points). Pitches
    are templated unless a live gateway is supplied, and fall back to the
    template on any gateway failure.
    """
    if candidate_kind not in CANDIDATE_KINDS:
        raise ValueError("candidate_kind must be one of %s, got %r"
                         % (CANDIDATE_KINDS, candidate_kind))
    if candidate_kind == "INCUMBENT":
        schedule = current_schedule
        template = load_template("pitch_incumbent")
    else:
        rng = np.random.default_rng(seed)
        delta = rng.uniform(-20.0, 20.0, current_schedule.n_brackets)
        schedule = apply_delta(current_schedule, delta)
        template = load_template("pitch_challenger")
    pitch = template.format(candidate_id=candidate_id,
                            tax=render_tax(schedule)).strip()
    if gateway is not None and gateway.config.backend == "HTTP":
        request = ChatRequest(
            model=gateway.config.model,
            system_prompt="You are a tax planner running for re-election. "
                          "Write a two-sentence pitch for the schedule you "
                          "propose. Plain text only.",
            user_prompt="Your proposed schedule: %s" % render_tax(schedule),
            request_id="pitch-%d" % candidate_id,
            metadata={"role": "pitch", "seq": candidate_id})
        try:
            reply = gateway.chat(request).strip()
            if reply:
                pitch = reply
        except GatewayError:
            pass
    return Platform(candidate_id=candidate_id, proposed_schedule=schedule,
                    pitch_text=pitch)
