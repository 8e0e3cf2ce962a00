from .actions import (
    ActionMessage,
    ActionParseError,
    NoJsonFound,
    NonNumeric,
    Platform,
    WrongArity,
    WrongKey,
    parse_action,
    render_action,
)
from .buffer import ReplayBuffer, buffer_update
from .llm import PolicyOutcome, candidate_platform, planner_propose, worker_decide_llm
from .observations import PlannerObservation, WorkerObservation
from .prompts import (
    build_planner_prompt,
    build_worker_prompt,
    normalize_swf,
    planner_phase_hint,
    render_history,
    render_tax,
    worker_phase_hint,
)
from .scripted import (
    cast_vote_scripted,
    rational_best_response,
    satisfaction_flag_scripted,
)

__all__ = [
    "ActionMessage",
    "ActionParseError",
    "NoJsonFound",
    "NonNumeric",
    "Platform",
    "PlannerObservation",
    "PolicyOutcome",
    "ReplayBuffer",
    "WorkerObservation",
    "WrongArity",
    "WrongKey",
    "buffer_update",
    "build_planner_prompt",
    "build_worker_prompt",
    "candidate_platform",
    "cast_vote_scripted",
    "normalize_swf",
    "parse_action",
    "planner_phase_hint",
    "planner_propose",
    "rational_best_response",
    "render_action",
    "render_history",
    "render_tax",
    "satisfaction_flag_scripted",
    "worker_decide_llm",
    "worker_phase_hint",
]
