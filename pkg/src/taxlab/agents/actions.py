"""Wire format for agent decisions.

Replies are free text that must end up containing one JSON object per the
protocol: workers emit ``{"LABOR": <number>}``, planners emit
``{"DELTA": [<numbers>]}``. Parsing scans for every decodable object and
keeps the last one carrying the expected key, so chatty reasoning before
the payload is fine.
"""

import json
import math
from dataclasses import dataclass

from ..fiscal import TaxSchedule

KINDS = ("LABOR", "DELTA")


class ActionParseError(Exception):
    """Base for reply-decoding failures; subclasses drive retry logic."""


class NoJsonFound(ActionParseError):
    pass


class WrongKey(ActionParseError):
    pass


class WrongArity(ActionParseError):
    pass


class NonNumeric(ActionParseError):
    pass


@dataclass(frozen=True)
class ActionMessage:
    kind: str
    labor: float = None
    delta: tuple = None
    raw_text: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("kind must be one of %s, got %r" % (KINDS, self.kind))
        if self.kind == "LABOR":
            if self.labor is None or self.delta is not None:
                raise ValueError("LABOR message must carry labor only")
        else:
            if self.delta is None or self.labor is not None:
                raise ValueError("DELTA message must carry delta only")
            object.__setattr__(self, "delta", tuple(float(d) for d in self.delta))


@dataclass(frozen=True)
class Platform:
    """Election candidacy: a schedule plus the text pitched to voters."""

    candidate_id: int
    proposed_schedule: TaxSchedule
    pitch_text: str

    def __post_init__(self):
        if not isinstance(self.proposed_schedule, TaxSchedule):
            raise ValueError("proposed_schedule must be a TaxSchedule")


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _decoded_objects(raw):
    decoder = json.JSONDecoder()
    out = []
    start = raw.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(raw, start)
        except ValueError:
            pass
        else:
            if isinstance(obj, dict):
                out.append(obj)
        start = raw.find("{", start + 1)
    return out


def parse_action(raw, kind, arity=None):
    """Decode the last well-formed JSON object in `raw` that carries `kind`.

    Raises NoJsonFound, WrongKey, WrongArity, or NonNumeric so callers can
    distinguish retryable failures.
    """
    if kind not in KINDS:
        raise ValueError("kind must be one of %s, got %r" % (KINDS, kind))
    objects = _decoded_objects(raw)
    if not objects:
        raise NoJsonFound("no JSON object in reply: %r" % (raw[:120],))
    carriers = [obj for obj in objects if kind in obj]
    if not carriers:
        raise WrongKey("no object with key %r in reply: %r" % (kind, raw[:120]))
    payload = carriers[-1][kind]
    if kind == "LABOR":
        if not _is_number(payload) or not math.isfinite(payload):
            raise NonNumeric("LABOR value %r is not a finite number" % (payload,))
        return ActionMessage(kind="LABOR", labor=float(payload), raw_text=raw)
    if not isinstance(payload, list):
        raise NonNumeric("DELTA value %r is not an array" % (payload,))
    if arity is not None and len(payload) != arity:
        raise WrongArity("DELTA has %d entries, expected %d" % (len(payload), arity))
    if not all(_is_number(v) and math.isfinite(v) for v in payload):
        raise NonNumeric("DELTA entries must all be finite numbers, got %r" % (payload,))
    return ActionMessage(kind="DELTA", delta=tuple(float(v) for v in payload),
                         raw_text=raw)


def render_action(message):
    """Exact wire form of a decision, suitable for scripted replies."""
    if message.kind == "LABOR":
        return json.dumps({"LABOR": message.labor})
    return json.dumps({"DELTA": list(message.delta)})
