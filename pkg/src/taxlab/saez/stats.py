"""Per-bracket welfare statistics and the optimal-rate formula.

For bracket j spanning [z_j, z_{j+1}) the discrete sums are

    A_j = [sum_in g_i (z_i - z_j) + sum_above g_i (z_{j+1} - z_j)] / sum g_i
    B_j = [sum_in (z_i - z_j) + count_above (z_{j+1} - z_j)] / N
    C_j = sum_in z_i / N

with G_j = A_j / B_j weighing who bears a rate rise and alpha_j = C_j / B_j
scaling the behavioral base. The revenue-maximizing balance of the
mechanical and behavioral margins gives rate = (1 - G) / (1 - G + alpha e).
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WelfareWeights:
    g: tuple

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.float64)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("weights must be finite and >= 0")
        if not np.any(g > 0):
            raise ValueError("weights must not all be zero")
        object.__setattr__(self, "g", tuple(float(w) for w in g))

    @classmethod
    def from_incomes(cls, incomes, floor=1e-6):
        """Inverse-income weights, matching the simulator's welfare scaling."""
        z = np.asarray(incomes, dtype=np.float64)
        return cls(g=tuple(1.0 / np.maximum(z, floor)))

    @property
    def array(self):
        return np.asarray(self.g, dtype=np.float64)


@dataclass(frozen=True)
class SaezBracketStats:
    bracket: int
    A: float
    B: float
    C: float
    G: float
    alpha: float
    elasticity: float = float("nan")

    def to_dict(self):
        return {"bracket": self.bracket, "A": self.A, "B": self.B,
                "C": self.C, "G": self.G, "alpha": self.alpha,
                "elasticity": self.elasticity}


def bracket_statistics(incomes, weights, schedule, bracket):
    """Discrete A/B/C/G/alpha for one bracket; None when the bracket and
    everything above it carry no income (B = 0)."""
    z = np.asarray(incomes, dtype=np.float64)
    g = weights.array
    if z.shape != g.shape:
        raise ValueError("incomes and weights must align: %s vs %s"
                         % (z.shape, g.shape))
    n_brackets = schedule.n_brackets
    if not (0 <= bracket < n_brackets):
        raise ValueError("bracket %d out of range [0, %d)" % (bracket, n_brackets))
    lo = schedule.thresholds[bracket]
    hi = (schedule.thresholds[bracket + 1]
          if bracket + 1 < n_brackets else math.inf)
    in_bracket = (z >= lo) & (z < hi)
    above = z >= hi
    n = z.size
    width = hi - lo

    a_sum = float(np.sum(g[in_bracket] * (z[in_bracket] - lo)))
    b_sum = float(np.sum(z[in_bracket] - lo))
    if np.any(above):
        a_sum += float(np.sum(g[above])) * width
        b_sum += float(np.count_nonzero(above)) * width
    total_g = float(np.sum(g))
    A = a_sum / total_g
    B = b_sum / n
    C = float(np.sum(z[in_bracket])) / n
    if B <= 0.0:
        return None
    return SaezBracketStats(bracket=bracket, A=A, B=B, C=C,
                            G=A / B, alpha=C / B)


def saez_rate(G, alpha, elasticity, rate_min=0.0, rate_max=0.99):
    """Optimal marginal rate (1 - G) / (1 - G + alpha * e), clamped."""
    values = (G, alpha, elasticity)
    if not all(math.isfinite(v) for v in values):
        raise ValueError("G, alpha, elasticity must be finite, got %r" % (values,))
    denom = (1.0 - G) + alpha * elasticity
    if denom == 0.0:
        raise ValueError("degenerate rate: 1 - G + alpha*e is zero")
    rate = (1.0 - G) / denom
    return float(min(max(rate, rate_min), rate_max))
