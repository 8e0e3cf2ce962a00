"""Deterministic stand-in for a chat model.

Replies are pure functions of (policy fields, request fields): all
randomness derives from a SHA-256 digest of both, so identical runs produce
identical transcripts with no hidden state. The request metadata carries a
machine-readable observation digest (role, economic state, monotone `seq`)
that the modes consume.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels

MODES = ("RATIONAL_ECHO", "NOISY", "SCRIPT", "MALFORMED_EVERY_N")

_MALFORMED_TEXT = "after reflection I believe the right choice follows from context"


@dataclass(frozen=True)
class MockPolicy:
    mode: str = "RATIONAL_ECHO"
    seed: int = 0
    precision: int = 2
    noise_scale: float = 2.0
    script: tuple = ()
    malformed_every: int = 3

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError("mode must be one of %s" % (MODES,))
        if self.mode == "SCRIPT" and not self.script:
            raise ValueError("SCRIPT mode needs a nonempty script")
        if self.malformed_every < 1:
            raise ValueError("malformed_every must be >= 1")
        object.__setattr__(self, "script", tuple(self.script))

    def to_dict(self):
        return {
            "mode": self.mode,
            "seed": self.seed,
            "precision": self.precision,
            "noise_scale": self.noise_scale,
            "script": list(self.script),
            "malformed_every": self.malformed_every,
        }

    @classmethod
    def from_dict(cls, payload):
        payload = dict(payload)
        payload["script"] = tuple(payload.get("script", ()))
        return cls(**payload)


def _request_rng(policy_seed, request):
    material = json.dumps(
        [policy_seed, request.request_id, request.system_prompt,
         request.user_prompt, sorted(request.metadata.items(), key=lambda kv: kv[0])],
        sort_keys=True, default=str)
    digest = hashlib.sha256(material.encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _echo_worker(digest, precision):
    labor = _kernels.best_response(
        float(digest["skill"]),
        tuple(digest["thresholds"]),
        tuple(digest["rates"]),
        float(digest["rebate"]),
        float(digest["eta"]), float(digest["psi"]), float(digest["delta"]),
        float(digest["labor_lo"]), float(digest["labor_hi"]))
    return labor


def _echo_planner_delta(digest, rng, jitter=0.0):
    arity = int(digest["arity"])
    phase = digest.get("phase", "EXPLORE")
    current = digest.get("current_rates")
    best = digest.get("best_rates")
    if phase == "EXPLOIT" and best is not None and current is not None:
        delta = [
            float(np.clip((b - c) * 100.0, -20.0, 20.0))
            for b, c in zip(best, current)
        ]
    else:
        delta = [float(d) for d in rng.uniform(-20.0, 20.0, arity)]
    if jitter > 0.0:
        delta = [float(np.clip(d + rng.uniform(-jitter, jitter), -20.0, 20.0))
                 for d in delta]
    return [round(d, 1) for d in delta]


def mock_chat(request, policy):
    """Deterministic reply text for a request under a mock policy."""
    meta = request.metadata
    seq = int(meta.get("seq", 0))

    if policy.mode == "SCRIPT":
        return policy.script[seq % len(policy.script)]

    if policy.mode == "MALFORMED_EVERY_N" and (seq + 1) % policy.malformed_every == 0:
        return _MALFORMED_TEXT

    role = meta.get("role")
    digest = meta.get("digest", {})
    rng = _request_rng(policy.seed, request)

    if role == "worker":
        labor = _echo_worker(digest, policy.precision)
        if policy.mode == "NOISY":
            lo = float(digest["labor_lo"])
            hi = float(digest["labor_hi"])
            labor = float(np.clip(
                labor + rng.uniform(-policy.noise_scale, policy.noise_scale), lo, hi))
        value = round(labor, policy.precision)
        return 'My hours this week: {"LABOR": %s}' % json.dumps(value)

    if role == "planner":
        jitter = policy.noise_scale if policy.mode == "NOISY" else 0.0
        delta = _echo_planner_delta(digest, rng, jitter=jitter)
        return 'Adjusting the schedule. {"DELTA": %s}' % json.dumps(delta)

    raise ValueError("mock policy cannot answer role %r" % (role,))
