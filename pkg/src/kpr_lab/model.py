"""Domain types for the Kolkata Paise Restaurant simulation.

N agents pick among N single-serving restaurants each day; every non-empty
restaurant serves exactly one randomly chosen arrival.  These types carry the
configuration of one experiment and the per-day / per-run observables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

MAX_SEED = 2**64 - 1

DEFAULT_MAX_DAYS = 1000
GREEDY_MAX_DAYS_FACTOR = 10


class Strategy(Enum):
    """How an agent picks tomorrow's restaurant from yesterday's crowd info."""

    RANDOM = "random"
    CROWD_AVOIDING = "ca"
    GREEDY_CROWD_AVOIDING = "gca"


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of one simulation run.

    ``alpha`` is the crowd-avoidance exponent: an agent returns to
    yesterday's restaurant with probability ``1 / crowd**alpha``.  It only
    affects CROWD_AVOIDING; the greedy variant always uses the ``alpha = 1``
    rule for its non-served agents, and the random strategy ignores it.

    ``max_days = None`` resolves to 1000 days for random/crowd-avoiding runs
    and ``10 * n`` for greedy runs (whose convergence time scales with n).
    """

    n: int
    strategy: Strategy
    alpha: float = 1.0
    max_days: int | None = None
    seed: int = 0
    tail_window_fraction: float = 0.5
    stability_days: int = 10
    record_history: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.max_days is not None and self.max_days < 1:
            raise ValueError(f"max_days must be >= 1, got {self.max_days}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        if not 0.0 < self.tail_window_fraction < 1.0:
            raise ValueError(
                f"tail_window_fraction must be in (0,1), got {self.tail_window_fraction}"
            )
        if self.stability_days < 1:
            raise ValueError(f"stability_days must be >= 1, got {self.stability_days}")

    @property
    def effective_max_days(self) -> int:
        if self.max_days is not None:
            return self.max_days
        if self.strategy is Strategy.GREEDY_CROWD_AVOIDING:
            return GREEDY_MAX_DAYS_FACTOR * self.n
        return DEFAULT_MAX_DAYS


@dataclass
class AgentState:
    """One agent's view of yesterday: where it went, how crowded it was."""

    last_restaurant: int
    last_crowd: int
    was_served: bool
    success_count: int = 0


@dataclass(frozen=True)
class DayRecord:
    """Outcome of a single day (day numbers are 1-based).

    ``crowd_histogram`` maps crowd size -> number of restaurants with that
    many arrivals, including size 0 (empty restaurants).
    """

    day: int
    served_count: int
    crowd_histogram: dict[int, int]
    utilization: float


@dataclass
class RunResult:
    """Everything measured from one run.

    ``tau`` counts the days strictly before the first converged day, so a
    run that is converged from day 1 has ``tau = 0``.  ``final_rates`` holds
    each agent's cumulative success percentage at day max(tau, 1).
    ``success_history`` is a (days, n) boolean matrix of per-day service
    flags, only kept when the config asked for history recording.
    """

    config: SimulationConfig
    f_series: np.ndarray
    tau: int
    f_s: float
    final_rates: np.ndarray
    converged: bool
    success_history: np.ndarray | None = None

    @property
    def days(self) -> int:
        return len(self.f_series)


@dataclass(frozen=True)
class RunSummary:
    """Slim per-run record kept inside an ensemble summary."""

    seed: int
    tau: int
    f_s: float
    converged: bool
    min_final_rate: float


@dataclass
class EnsembleSummary:
    """Statistics over independent runs of one configuration.

    Standard deviations are population stddevs (ddof=0), so a single-run
    ensemble reports 0.  ``dispersion_min_rate_mean`` averages, over runs,
    the minimum final cumulative success rate across agents.
    """

    config: SimulationConfig
    runs: int
    tau_mean: float
    tau_std: float
    fs_mean: float
    fs_std: float
    dispersion_min_rate_mean: float
    converged_fraction: float
    per_run: list[RunSummary] = field(default_factory=list)
