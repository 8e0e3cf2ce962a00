from .config import SimConfig, parse_override
from .events import (
    EventLog,
    SCHEMA_VERSION,
    election_record,
    header_record,
    parse_failure_record,
    policy_record,
    step_record,
)
from .loop import (
    RunResult,
    SimState,
    WorkerState,
    build_state,
    make_gateway,
    planner_update,
    run_election,
    run_simulation,
    step,
)
from .metrics import (
    EXPORT_KINDS,
    MetricsSummary,
    convergence_step,
    export_bracket_shares_csv,
    export_rates_csv,
    export_swf_csv,
    replay,
    summarize,
    swf_moving_average,
)

__all__ = [
    "EXPORT_KINDS",
    "EventLog",
    "MetricsSummary",
    "RunResult",
    "SCHEMA_VERSION",
    "SimConfig",
    "SimState",
    "WorkerState",
    "build_state",
    "convergence_step",
    "election_record",
    "export_bracket_shares_csv",
    "export_rates_csv",
    "export_swf_csv",
    "header_record",
    "make_gateway",
    "parse_failure_record",
    "parse_override",
    "planner_update",
    "policy_record",
    "replay",
    "run_election",
    "run_simulation",
    "step",
    "step_record",
    "summarize",
    "swf_moving_average",
]
