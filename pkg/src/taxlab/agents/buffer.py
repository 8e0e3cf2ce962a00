"""Planner memory: the top-h (schedule, welfare) pairs seen so far."""

from dataclasses import dataclass, field

from ..fiscal import TaxSchedule


@dataclass(frozen=True)
class ReplayBuffer:
    capacity: int = 5
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        entries = tuple((schedule, float(swf)) for schedule, swf in self.entries)
        swfs = [swf for _, swf in entries]
        if swfs != sorted(swfs, reverse=True):
            raise ValueError("entries must be sorted descending by swf")
        if len(entries) > self.capacity:
            raise ValueError("buffer holds %d entries, capacity %d"
                             % (len(entries), self.capacity))
        object.__setattr__(self, "entries", entries)

    @property
    def best(self):
        return self.entries[0] if self.entries else None

    def to_dict(self):
        return {"capacity": self.capacity,
                "entries": [[s.to_dict(), swf] for s, swf in self.entries]}

    @classmethod
    def from_dict(cls, payload):
        entries = tuple((TaxSchedule.from_dict(s), swf)
                        for s, swf in payload["entries"])
        return cls(capacity=payload["capacity"], entries=entries)


def buffer_update(buffer, schedule, swf):
    """Insert, keep descending-by-swf order, truncate to capacity.

    The sort is stable, so on ties the earlier insert stays ahead and the
    best entry never regresses.
    """
    merged = sorted(list(buffer.entries) + [(schedule, float(swf))],
                    key=lambda entry: -entry[1])
    return ReplayBuffer(capacity=buffer.capacity,
                        entries=tuple(merged[:buffer.capacity]))
