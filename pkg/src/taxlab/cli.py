"""Command-line entry point.

Subcommands:
  simulate    run a configured simulation into a self-describing directory
  fit-gb2     fit income samples and emit params + Q-Q data
  solve-saez  run the bracket-wise optimal-rate solver for a config's economy
  evaluate    score a fixed schedule over one tax year of scripted workers
  replay      recompute a summary from a persisted event log
  export      emit plot-ready CSVs from a persisted event log

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

import taxlab

from .engine import (
    EventLog,
    SimConfig,
    parse_override,
    replay as replay_log,
    run_simulation,
)
from .engine.loop import _sample_skills
from .engine.metrics import EXPORT_KINDS
from .fiscal import TaxSchedule
from .population import fit_gb2, gb2_qq, load_income_csv
from .saez import RationalEconomy, SaezSolveResult, solve_piecewise_saez

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class CliError(Exception):
    def __init__(self, message, code=RUNTIME_ERROR):
        super().__init__(message)
        self.code = code


def _utc_now():
    return datetime.now(timezone.utc).isoformat()


def _load_config(path, overrides):
    if not os.path.exists(path):
        raise CliError("config file not found: %s" % path, USAGE_ERROR)
    try:
        config = SimConfig.from_json(path)
        if overrides:
            parsed = dict(parse_override(item) for item in overrides)
            config = config.with_overrides(parsed)
        return config
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise CliError("invalid config: %s" % exc, USAGE_ERROR)


def _load_schedule(path):
    if not os.path.exists(path):
        raise CliError("schedule file not found: %s" % path, USAGE_ERROR)
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    known = {"thresholds", "rates", "rate_min", "rate_max"}
    kwargs = {k: v for k, v in data.items() if k in known}
    try:
        return TaxSchedule(**{
            k: tuple(v) if isinstance(v, list) else v
            for k, v in kwargs.items()})
    except (ValueError, TypeError) as exc:
        raise CliError("invalid schedule: %s" % exc, USAGE_ERROR)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def _prepare_out_dir(path):
    os.makedirs(path, exist_ok=True)
    os.makedirs(os.path.join(path, "exports"), exist_ok=True)


def cmd_simulate(args):
    config = _load_config(args.config, args.override)
    if args.seed is not None:
        config = config.with_overrides({"seed": args.seed})
    _prepare_out_dir(args.out)
    paths = {
        "events": os.path.join(args.out, "events.jsonl"),
        "summary": os.path.join(args.out, "summary.json"),
        "exports": [os.path.join(args.out, "exports", "%s.csv" % kind)
                    for kind in sorted(EXPORT_KINDS)],
    }
    # The manifest predates the run and never changes; wall-clock results
    # land in run_report.json afterwards.
    _write_json(os.path.join(args.out, "manifest.json"), {
        "config": config.to_dict(),
        "seed": config.seed,
        "version": taxlab.__version__,
        "started_at": _utc_now(),
        "outputs": paths,
    })
    transcript = (os.path.join(args.out, "transcript.jsonl")
                  if args.transcript else None)
    result = run_simulation(config, transcript_path=transcript)
    result.log.write(paths["events"])
    _write_json(paths["summary"], result.summary.to_dict())
    for kind, writer in sorted(EXPORT_KINDS.items()):
        writer(result.log, os.path.join(args.out, "exports", "%s.csv" % kind))
    _write_json(os.path.join(args.out, "run_report.json"), {
        "finished_at": _utc_now(),
        "throughput": result.throughput,
        "n_records": len(result.log),
        "parse_failures": len(result.log.parse_failures()),
        "elections": len(result.log.elections()),
    })
    print("run complete: %d steps, %d workers -> %s"
          % (result.summary.n_steps, result.summary.n_workers, args.out))
    return 0


def cmd_fit_gb2(args):
    if not os.path.exists(args.csv):
        raise CliError("income CSV not found: %s" % args.csv, USAGE_ERROR)
    try:
        samples = load_income_csv(args.csv, column=args.column)
    except (ValueError, KeyError) as exc:
        raise CliError("cannot read incomes: %s" % exc, USAGE_ERROR)
    fit = fit_gb2(samples, seed=args.seed)
    sample_q, model_q = gb2_qq(samples, fit.params)
    corr = float(np.corrcoef(sample_q, model_q)[0, 1])
    os.makedirs(args.out, exist_ok=True)
    params_path = os.path.join(args.out, "gb2_params.json")
    _write_json(params_path, {
        "a": fit.params.a, "b": fit.params.b,
        "p": fit.params.p, "q": fit.params.q,
        "loglik": fit.loglik, "n_samples": int(len(samples)),
        "qq_correlation": corr,
    })
    qq_path = os.path.join(args.out, "gb2_qq.csv")
    with open(qq_path, "w", encoding="utf-8") as fh:
        fh.write("sample_quantile,model_quantile\n")
        for s, m in zip(sample_q, model_q):
            fh.write("%r,%r\n" % (float(s), float(m)))
    print("fit a=%.4f b=%.1f p=%.4f q=%.4f (qq corr %.4f) -> %s"
          % (fit.params.a, fit.params.b, fit.params.p, fit.params.q, corr,
             params_path))
    return 0


def cmd_solve_saez(args):
    config = _load_config(args.config, args.override)
    skills = _sample_skills(config)
    economy = RationalEconomy(skills, config.utility_params(phi=0.0),
                              labor_bounds=config.labor_bounds)
    result = solve_piecewise_saez(
        economy, config.initial_schedule(), dtau=args.dtau,
        damping=args.damping, max_iters=args.max_iters)
    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, "saez_report.json")
    _write_json(report_path, result.to_dict())
    print("solved in %d iterations (converged=%s): rates %s, swf %.6f -> %s"
          % (result.iterations, result.converged,
             ["%.4f" % r for r in result.schedule.rates], result.swf,
             report_path))
    return 0


def cmd_evaluate(args):
    config = _load_config(args.config, args.override)
    schedule = _load_schedule(args.schedule)
    eval_config = config.with_overrides({
        "total_steps": config.steps_per_year,
        "worker_policy": "rational",
        "planner_policy": "hold",
        "governance": "FIXED",
        "thresholds": list(schedule.thresholds),
        "initial_rates": list(schedule.rates),
        "rate_min": schedule.rate_min,
        "rate_max": schedule.rate_max,
    })
    result = run_simulation(eval_config)
    final_step = result.log.steps()[-1]
    payload = {
        "schedule": {"thresholds": list(schedule.thresholds),
                     "rates": list(schedule.rates)},
        "converged_swf": final_step["swf"],
        "year_mean_swf": result.summary.years[0]["mean_swf"],
        "convergence_step": result.summary.years[0]["convergence_step"],
        "rebate": final_step["rebate"],
    }
    if args.out:
        _write_json(args.out, payload)
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_replay(args):
    if not os.path.exists(args.log):
        raise CliError("event log not found: %s" % args.log, USAGE_ERROR)
    try:
        log = EventLog.read(args.log)
    except ValueError as exc:
        raise CliError("cannot replay: %s" % exc, RUNTIME_ERROR)
    summary = replay_log(log)
    if args.out:
        _write_json(args.out, summary.to_dict())
    print(summary.to_json())
    return 0


def cmd_export(args):
    if not os.path.exists(args.log):
        raise CliError("event log not found: %s" % args.log, USAGE_ERROR)
    try:
        log = EventLog.read(args.log)
    except ValueError as exc:
        raise CliError("cannot export: %s" % exc, RUNTIME_ERROR)
    writer = EXPORT_KINDS[args.kind]
    writer(log, args.out)
    print("wrote %s" % args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="taxlab",
        description="Two-level tax simulator: schedules, workers, elections.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured simulation")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default="run_out")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--override", action="append", default=[],
                     metavar="FIELD=VALUE")
    sim.add_argument("--transcript", action="store_true",
                     help="also record every gateway exchange")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit-gb2", help="fit income samples")
    fit.add_argument("csv")
    fit.add_argument("--column", default="income")
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out", default="fit_out")
    fit.set_defaults(func=cmd_fit_gb2)

    solve = sub.add_parser("solve-saez", help="solve bracket-wise rates")
    solve.add_argument("--config", required=True)
    solve.add_argument("--out", default="saez_out")
    solve.add_argument("--dtau", type=float, default=0.01)
    solve.add_argument("--damping", type=float, default=0.5)
    solve.add_argument("--max-iters", type=int, default=30)
    solve.add_argument("--override", action="append", default=[],
                       metavar="FIELD=VALUE")
    solve.set_defaults(func=cmd_solve_saez)

    ev = sub.add_parser("evaluate", help="score a fixed schedule")
    ev.add_argument("--schedule", required=True)
    ev.add_argument("--config", required=True)
    ev.add_argument("--out", default="")
    ev.add_argument("--override", action="append", default=[],
                    metavar="FIELD=VALUE")
    ev.set_defaults(func=cmd_evaluate)

    rep = sub.add_parser("replay", help="recompute a summary from a log")
    rep.add_argument("log")
    rep.add_argument("--out", default="")
    rep.set_defaults(func=cmd_replay)

    exp = sub.add_parser("export", help="emit plot CSVs from a log")
    exp.add_argument("log")
    exp.add_argument("--kind", choices=sorted(EXPORT_KINDS), required=True)
    exp.add_argument("--out", required=True)
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print("error: %s" % exc, file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
