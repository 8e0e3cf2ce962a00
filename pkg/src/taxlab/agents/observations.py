"""What each side of the game gets to see before acting."""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class WorkerObservation:
    pre_tax: float
    post_tax: float
    marginal_rate_at_income: float
    rebate: float
    history: tuple = ()
    window: int = 10
    satisfied: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        history = tuple((float(l), float(u)) for l, u in self.history)
        if len(history) > self.window:
            raise ValueError("history has %d entries, window is %d"
                             % (len(history), self.window))
        if self.pre_tax < 0:
            raise ValueError("pre_tax must be >= 0")
        if self.satisfied not in (0, 1):
            raise ValueError("satisfied must be 0 or 1")
        object.__setattr__(self, "history", history)


@dataclass(frozen=True)
class PlannerObservation:
    income_histogram: tuple
    utility_histogram: tuple
    swf_moving_average: float
    best_trajectories: tuple = ()

    def __post_init__(self):
        income = tuple(int(c) for c in self.income_histogram)
        utility = tuple(float(u) for u in self.utility_histogram)
        if len(income) != len(utility):
            raise ValueError("histograms must have one bucket per bracket: "
                             "%d counts vs %d utilities"
                             % (len(income), len(utility)))
        if not income:
            raise ValueError("histograms must be nonempty")
        object.__setattr__(self, "income_histogram", income)
        object.__setattr__(self, "utility_histogram", utility)
        object.__setattr__(self, "best_trajectories",
                           tuple(self.best_trajectories))
