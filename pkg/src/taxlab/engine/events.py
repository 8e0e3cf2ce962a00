"""Append-only event log with a versioned JSONL wire format.

Record kinds, in their within-step order:
  HEADER         run metadata, first line only
  ELECTION       year-boundary vote (DEMOCRATIC runs)
  POLICY         planner schedule update
  PARSE_FAILURE  an agent reply that never parsed
  STEP           one simulated day

Every record carries a global `seq` so ordering survives serialization.
STEP records embed the active rates, making them self-sufficient for
replay: all derived metrics are recomputable from STEP records alone.
"""

import json

KIND_ORDER = ("HEADER", "ELECTION", "POLICY", "PARSE_FAILURE", "STEP")
SCHEMA_VERSION = 1


class EventLog:
    """In-memory record list; the engine is the only writer."""

    def __init__(self, records=None):
        self.records = list(records) if records is not None else []

    def append(self, record):
        if record.get("kind") not in KIND_ORDER:
            raise ValueError("unknown record kind %r" % (record.get("kind"),))
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def of_kind(self, kind):
        return [r for r in self.records if r["kind"] == kind]

    def steps(self):
        return self.of_kind("STEP")

    def policies(self):
        return self.of_kind("POLICY")

    def elections(self):
        return self.of_kind("ELECTION")

    def parse_failures(self):
        return self.of_kind("PARSE_FAILURE")

    def header(self):
        return self.records[0] if self.records else None

    def to_jsonl(self):
        lines = [json.dumps(r, sort_keys=True, separators=(",", ":"))
                 for r in self.records]
        return "\n".join(lines) + ("\n" if lines else "")

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def read(cls, path):
        records = []
        last = None
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(
                        "corrupted record at %s:%d (%s); last valid record: %s"
                        % (path, lineno, exc, _describe(last))) from exc
                if not isinstance(record, dict) \
                        or record.get("kind") not in KIND_ORDER:
                    raise ValueError(
                        "corrupted record at %s:%d (not an event record); "
                        "last valid record: %s" % (path, lineno,
                                                   _describe(last)))
                records.append(record)
                last = record
        log = cls(records)
        if records and records[0]["kind"] != "HEADER":
            raise ValueError("log %s does not start with a HEADER record"
                             % path)
        return log


def _describe(record):
    if record is None:
        return "none"
    return "kind=%s t=%s seq=%s" % (record.get("kind"), record.get("t"),
                                    record.get("seq"))


def header_record(seq, config_dict, package_version):
    return {"kind": "HEADER", "seq": seq, "t": -1,
            "schema_version": SCHEMA_VERSION, "config": config_dict,
            "version": package_version}


def step_record(seq, t, tax_year, schedule, labor, pre_tax, post_tax,
                utilities, satisfied, rebate, total_tax, swf):
    return {
        "kind": "STEP", "seq": seq, "t": t, "tax_year": tax_year,
        "thresholds": [float(x) for x in schedule.thresholds],
        "rates": [float(x) for x in schedule.rates],
        "labor": [float(x) for x in labor],
        "pre_tax": [float(x) for x in pre_tax],
        "post_tax": [float(x) for x in post_tax],
        "utilities": [float(x) for x in utilities],
        "satisfied": [int(x) for x in satisfied],
        "rebate": float(rebate), "total_tax": float(total_tax),
        "swf": float(swf),
    }


def policy_record(seq, t, tax_year, old_schedule, new_schedule, delta, phase,
                  attempts, parse_failed, period_swf, best_swf):
    return {
        "kind": "POLICY", "seq": seq, "t": t, "tax_year": tax_year,
        "thresholds": [float(x) for x in old_schedule.thresholds],
        "old_rates": [float(x) for x in old_schedule.rates],
        "new_rates": [float(x) for x in new_schedule.rates],
        "delta": [float(x) for x in delta],
        "phase": phase, "attempts": int(attempts),
        "parse_failed": bool(parse_failed),
        "period_swf": None if period_swf is None else float(period_swf),
        "best_swf": None if best_swf is None else float(best_swf),
    }


def election_record(seq, t, tax_year, platforms, votes, winner,
                    challenger_won):
    tally = {}
    for vote in votes:
        tally[vote] = tally.get(vote, 0) + 1
    return {
        "kind": "ELECTION", "seq": seq, "t": t, "tax_year": tax_year,
        "platforms": [
            {"candidate_id": p.candidate_id,
             "rates": [float(x) for x in p.proposed_schedule.rates],
             "thresholds": [float(x) for x in p.proposed_schedule.thresholds],
             "pitch": p.pitch_text}
            for p in platforms
        ],
        "votes": list(votes),
        "tally": {k: tally[k] for k in sorted(tally)},
        "winner": winner, "challenger_won": bool(challenger_won),
    }


def parse_failure_record(seq, t, tax_year, agent, raw_text, error):
    return {"kind": "PARSE_FAILURE", "seq": seq, "t": t, "tax_year": tax_year,
            "agent": agent, "raw_text": raw_text, "error": error}
