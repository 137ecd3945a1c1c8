"""Single-run simulation engine.

A run is strictly sequential: all agents choose simultaneously from
yesterday's state, crowds are tallied, and every non-empty restaurant serves
one uniformly chosen arrival.  Day 1 has no yesterday, so every agent picks
uniformly at random (the zero-memory baseline), which also seeds the
crowd-avoiding strategies with their first crowd observation.

Random-number consumption per day is fixed: the choice phase draws in agent
order (see strategy.sample_choices_vectorized), then the service lottery
draws one uniform per contested restaurant (crowd of two or more) in
ascending restaurant order; lone arrivals are served without a draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AgentState, DayRecord, RunResult, SimulationConfig, Strategy
from .strategy import sample_choices_vectorized


@dataclass
class WorldState:
    """Mutable per-run state, stored as arrays of length n.

    ``served_agent[k]`` is the agent served at restaurant k today, or -1 if
    nobody went there.
    """

    day: int
    last_restaurant: np.ndarray
    last_crowd: np.ndarray
    was_served: np.ndarray
    success_count: np.ndarray
    crowds: np.ndarray
    served_agent: np.ndarray

    def agent(self, i: int) -> AgentState:
        return AgentState(
            last_restaurant=int(self.last_restaurant[i]),
            last_crowd=int(self.last_crowd[i]),
            was_served=bool(self.was_served[i]),
            success_count=int(self.success_count[i]),
        )

    @property
    def agents(self) -> list[AgentState]:
        return [self.agent(i) for i in range(len(self.last_restaurant))]


def _service_lottery(
    choices: np.ndarray, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tally crowds and pick one served agent per non-empty restaurant.

    A lone arrival is served outright; only contested restaurants (crowd of
    two or more) consume randomness, one uniform each in ascending
    restaurant order.
    """
    crowds = np.bincount(choices, minlength=n)
    served = np.zeros(n, dtype=bool)
    served_agent = np.full(n, -1, dtype=np.int64)

    solo = crowds[choices] == 1
    served[solo] = True
    served_agent[choices[solo]] = np.flatnonzero(solo)

    contested = np.flatnonzero(crowds >= 2)
    if contested.size:
        sizes = crowds[contested]
        u = rng.random(contested.size)
        offsets = np.minimum((u * sizes).astype(np.int64), sizes - 1)
        # crowd members grouped by restaurant, ascending; the stable sort
        # keeps agent order within each group
        members = np.flatnonzero(~solo)
        grouped = members[np.argsort(choices[members], kind="stable")]
        starts = np.cumsum(sizes) - sizes
        winners = grouped[starts + offsets]
        served[winners] = True
        served_agent[contested] = winners
    return crowds, served, served_agent


def _day_record(day: int, crowds: np.ndarray, n: int) -> DayRecord:
    counts = np.bincount(crowds)
    histogram = {0: int(counts[0])}
    for size in range(1, len(counts)):
        if counts[size]:
            histogram[size] = int(counts[size])
    served_count = int(n - counts[0])
    return DayRecord(
        day=day,
        served_count=served_count,
        crowd_histogram=histogram,
        utilization=served_count / n,
    )


def init_day_one(
    config: SimulationConfig, rng: np.random.Generator
) -> tuple[WorldState, DayRecord]:
    """Play day 1: uniform random choices by every agent, then the lottery."""
    n = config.n
    choices = rng.integers(0, n, size=n)
    crowds, served, served_agent = _service_lottery(choices, n, rng)
    state = WorldState(
        day=1,
        last_restaurant=choices,
        last_crowd=crowds[choices],
        was_served=served,
        success_count=served.astype(np.int64),
        crowds=crowds,
        served_agent=served_agent,
    )
    return state, _day_record(1, crowds, n)


def step_day(
    state: WorldState, config: SimulationConfig, rng: np.random.Generator
) -> DayRecord:
    """Advance one day: choices from yesterday's state, then the lottery."""
    n = config.n
    choices = sample_choices_vectorized(
        config.strategy,
        config.alpha,
        state.last_restaurant,
        state.last_crowd,
        state.was_served,
        n,
        rng,
    )
    crowds, served, served_agent = _service_lottery(choices, n, rng)
    state.last_restaurant = choices
    state.last_crowd = crowds[choices]
    state.was_served = served
    state.success_count += served
    state.crowds = crowds
    state.served_agent = served_agent
    state.day += 1
    return _day_record(state.day, crowds, n)


# Settlement threshold: a day counts as saturated once the smoothed series
# is within SETTLE_FRACTION of the day-1 transient amplitude around f_s,
# plus a NOISE_ALLOWANCE-sigma allowance for the smoothed series' own
# fluctuations.  AMPLITUDE_SIGNIFICANCE is the significance (in tail-mean
# standard errors) an amplitude must reach before a transient is considered
# present at all.
SETTLE_FRACTION = 0.15
NOISE_ALLOWANCE = 1.0
AMPLITUDE_SIGNIFICANCE = 5.0


def detect_convergence(
    f_series: np.ndarray, strategy: Strategy, config: SimulationConfig
) -> tuple[int, float, bool]:
    """Estimate the convergence day and saturation value of a utilization series.

    Greedy runs converge at the first day with f = 1 exactly.  For the other
    strategies, f_s and the day-to-day spread sigma come from the trailing
    tail window, and convergence means the initial transient has decayed:
    day 1 starts at the uniform-choice baseline 1 - (1 - 1/n)^n, and the
    converged day is the first day whose ``stability_days``-wide centered
    running mean lies within SETTLE_FRACTION of the day-1 amplitude
    |f_s - baseline| around f_s (plus a small allowance for the running
    mean's own noise).  The amplitude scale makes the estimate
    size-independent: the same criterion applied to a noisier (small n) or
    cleaner (large n) run targets the same point of the transient.  A series
    whose amplitude is indistinguishable from the tail noise (below
    AMPLITUDE_SIGNIFICANCE standard errors of the tail mean) has no
    transient and is converged from day 1.

    tau counts the days before the converged day, so a series stationary
    from the start reports tau = 0.  Returns (tau, f_s, converged); a series
    that never settles reports tau = len(f_series) and converged = False.
    """
    f_series = np.asarray(f_series, dtype=np.float64)
    days = len(f_series)
    if days == 0:
        raise ValueError("empty utilization series")

    if strategy is Strategy.GREEDY_CROWD_AVOIDING:
        full = np.flatnonzero(f_series == 1.0)
        if full.size:
            return int(full[0]), 1.0, True
        return days, float(f_series[-1]), False

    window_len = int(round(config.tail_window_fraction * days))
    if window_len < 2:
        raise ValueError(
            f"tail window of {window_len} samples is too small to estimate f_s"
        )
    tail = f_series[-window_len:]
    f_s = float(tail.mean())
    sigma = float(tail.std())

    baseline = 1.0 - (1.0 - 1.0 / config.n) ** config.n
    amplitude = abs(f_s - baseline)
    if amplitude <= AMPLITUDE_SIGNIFICANCE * sigma / np.sqrt(window_len):
        return 0, f_s, True

    k = min(config.stability_days, days)
    threshold = SETTLE_FRACTION * amplitude + NOISE_ALLOWANCE * sigma / np.sqrt(k)
    smoothed = _centered_running_mean(f_series, k)
    candidates = np.flatnonzero(np.abs(smoothed - f_s) <= threshold)
    if candidates.size:
        return int(candidates[0]), f_s, True
    return days, f_s, False


def _centered_running_mean(values: np.ndarray, k: int) -> np.ndarray:
    """k-wide running mean centered on each day, truncated at the ends."""
    half = k // 2
    cumulative = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(len(values))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + (k - half), len(values))
    return (cumulative[hi] - cumulative[lo]) / (hi - lo)


def run(config: SimulationConfig, rng: np.random.Generator | None = None) -> RunResult:
    """Execute one full run and assemble its result.

    Greedy runs stop at the first fully utilized day (f can only grow, and a
    day with everyone alone repeats forever); the other strategies always run
    the full horizon, since their saturation statistics come from the tail.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = config.n
    max_days = config.effective_max_days
    greedy = config.strategy is Strategy.GREEDY_CROWD_AVOIDING
    # Per-day service flags back final_rates at the (post hoc) day tau; for
    # greedy runs tau is known online, so a rolling snapshot suffices and the
    # multi-N-day horizon never has to be materialized.
    keep_flags = config.record_history or not greedy

    state, record = init_day_one(config, rng)
    f_values = [record.utilization]
    flags = [state.was_served.copy()] if keep_flags else None
    prev_counts: np.ndarray | None = None

    while state.day < max_days and not (greedy and f_values[-1] == 1.0):
        if greedy:
            prev_counts = state.success_count.copy()
        record = step_day(state, config, rng)
        f_values.append(record.utilization)
        if keep_flags:
            flags.append(state.was_served.copy())

    f_series = np.array(f_values)
    window_len = int(round(config.tail_window_fraction * len(f_series)))
    if greedy or window_len >= 2:
        tau, f_s, converged = detect_convergence(f_series, config.strategy, config)
    else:
        # horizon too short for a tail estimate; report non-convergence
        # rather than failing
        tau, f_s, converged = len(f_series), float(f_series.mean()), False
    history = np.stack(flags) if flags is not None else None

    rate_day = min(max(tau, 1), len(f_series))
    if history is not None:
        counts_at_day = history[:rate_day].sum(axis=0)
    elif converged and tau >= 1 and prev_counts is not None:
        counts_at_day = prev_counts
    else:
        # converged on day 1 (tau = 0) or ran the full horizon unconverged
        counts_at_day = state.success_count
    final_rates = 100.0 * counts_at_day / rate_day

    return RunResult(
        config=config,
        f_series=f_series,
        tau=tau,
        f_s=f_s,
        final_rates=final_rates,
        converged=converged,
        success_history=history if config.record_history else None,
    )
