"""Derived metrics, computed from STEP records only.

Both the live run and `replay` funnel through `summarize`, so equality
between them reduces to the STEP records being faithful, which the log
format guarantees. Anything not derivable from STEP records (election
outcomes, parse failures, wall-clock throughput) stays out of the
summary by design.
"""

import json
from dataclasses import dataclass

import numpy as np

HISTOGRAM_BINS = 10


@dataclass(frozen=True)
class MetricsSummary:
    n_steps: int
    n_workers: int
    n_years: int
    mean_swf: float
    final_year_swf: float
    years: tuple          # per-year dicts: year, mean_swf, rates, convergence
    final_income_histogram: tuple
    final_income_bin_edges: tuple

    def to_dict(self):
        return {
            "n_steps": self.n_steps,
            "n_workers": self.n_workers,
            "n_years": self.n_years,
            "mean_swf": self.mean_swf,
            "final_year_swf": self.final_year_swf,
            "years": [dict(y) for y in self.years],
            "final_income_histogram": list(self.final_income_histogram),
            "final_income_bin_edges": list(self.final_income_bin_edges),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def empty(cls):
        return cls(n_steps=0, n_workers=0, n_years=0, mean_swf=0.0,
                   final_year_swf=0.0, years=(), final_income_histogram=(),
                   final_income_bin_edges=())


def _steps_by_year(step_records):
    years = {}
    for record in step_records:
        years.setdefault(record["tax_year"], []).append(record)
    return [years[k] for k in sorted(years)]


def swf_moving_average(log, window):
    """Trailing mean of step SWF; shorter prefixes average what exists."""
    if window < 1:
        raise ValueError("window must be >= 1, got %d" % window)
    swf = [r["swf"] for r in log.steps()]
    out = []
    for i in range(len(swf)):
        lo = max(0, i - window + 1)
        out.append(float(np.mean(swf[lo:i + 1])))
    return out


def convergence_step(log, year, tolerance):
    """First step of the year after which the mean per-step utility change
    stays below tolerance through year end; None if it never settles.

    The change into the year's first step is excluded: it crosses the
    policy update at the year boundary.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive, got %r" % (tolerance,))
    records = [r for r in log.steps() if r["tax_year"] == year]
    if not records:
        raise ValueError("log has no STEP records for year %d" % year)
    utilities = np.asarray([r["utilities"] for r in records])
    steps = [r["t"] for r in records]
    if len(records) == 1:
        return steps[0]
    deltas = np.abs(np.diff(utilities, axis=0).mean(axis=1))
    settled = deltas < tolerance
    if settled.all():
        return steps[0]
    last_bad = int(np.flatnonzero(~settled)[-1])
    if last_bad == len(deltas) - 1:
        return None
    return steps[last_bad + 1]


def summarize(log, convergence_tol=1e-3):
    """Reduce a log's STEP records to the summary document."""
    steps = log.steps()
    if not steps:
        return MetricsSummary.empty()
    swf = np.asarray([r["swf"] for r in steps])
    years = []
    for records in _steps_by_year(steps):
        year = records[0]["tax_year"]
        years.append({
            "year": year,
            "mean_swf": float(np.mean([r["swf"] for r in records])),
            "rates": list(records[-1]["rates"]),
            "convergence_step": convergence_step(log, year, convergence_tol),
        })
    final_pre = np.asarray(steps[-1]["pre_tax"])
    hist, edges = np.histogram(
        final_pre, bins=HISTOGRAM_BINS,
        range=(0.0, max(float(final_pre.max()), 1.0)))
    return MetricsSummary(
        n_steps=len(steps),
        n_workers=len(steps[0]["labor"]),
        n_years=len(years),
        mean_swf=float(swf.mean()),
        final_year_swf=years[-1]["mean_swf"],
        years=tuple(years),
        final_income_histogram=tuple(int(c) for c in hist),
        final_income_bin_edges=tuple(float(e) for e in edges),
    )


def replay(log, convergence_tol=1e-3):
    """Recompute the summary from a persisted log's STEP records."""
    header = log.header()
    if header is not None and "config" in header:
        convergence_tol = header["config"].get("convergence_tol",
                                               convergence_tol)
    return summarize(log, convergence_tol=convergence_tol)


def export_swf_csv(log, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step,swf\n")
        for r in log.steps():
            fh.write("%d,%r\n" % (r["t"], r["swf"]))


def export_rates_csv(log, path):
    steps = log.steps()
    n = len(steps[0]["rates"]) if steps else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step," + ",".join("rate_%d" % j for j in range(n)) + "\n")
        for r in steps:
            fh.write("%d," % r["t"]
                     + ",".join(repr(x) for x in r["rates"]) + "\n")


def export_bracket_shares_csv(log, path):
    """Share of workers whose pre-tax income falls in each bracket."""
    steps = log.steps()
    n = len(steps[0]["rates"]) if steps else 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("step," + ",".join("share_%d" % j for j in range(n)) + "\n")
        for r in steps:
            thresholds = list(r["thresholds"]) + [float("inf")]
            incomes = np.asarray(r["pre_tax"])
            shares = []
            for j in range(n):
                in_j = (incomes >= thresholds[j]) & (incomes < thresholds[j + 1])
                shares.append(float(in_j.mean()))
            fh.write("%d," % r["t"] + ",".join(repr(s) for s in shares) + "\n")


EXPORT_KINDS = {
    "swf": export_swf_csv,
    "rates": export_rates_csv,
    "shares": export_bracket_shares_csv,
}
