"""Restaurant-choice rules.

All strategies are memoryless beyond one day: an agent knows only the crowd
size at the restaurant it visited yesterday and whether it was served there.

Random-number use is fixed so runs replay exactly: the random strategy draws
one integer per agent; the crowd-avoiding strategies draw one uniform for
the stay/leave decision and, only when leaving, one integer to pick among
the other n-1 restaurants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AgentState, Strategy


@dataclass(frozen=True)
class ChoiceRule:
    """Next-day choice distribution of a single crowd-avoiding agent."""

    stay_probability: float
    other_probability: float


def stay_probability(
    strategy: Strategy, alpha: float, last_crowd: int, was_served: bool
) -> float:
    """Probability of returning to yesterday's restaurant.

    Crowd-avoiding agents return with probability ``1 / crowd**alpha``; the
    greedy variant sends served agents back with certainty and applies the
    ``alpha = 1`` rule to everyone else.  The random strategy never consults
    this function.
    """
    if last_crowd < 1:
        raise ValueError(f"last_crowd must be >= 1, got {last_crowd}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if strategy is Strategy.CROWD_AVOIDING:
        return float(last_crowd) ** -alpha
    if strategy is Strategy.GREEDY_CROWD_AVOIDING:
        return 1.0 if was_served else 1.0 / last_crowd
    raise ValueError("random strategy does not define a stay probability")


def choice_rule(
    strategy: Strategy, alpha: float, last_crowd: int, was_served: bool, n: int
) -> ChoiceRule:
    """Full per-restaurant distribution: stay at k, else uniform over the rest."""
    p = stay_probability(strategy, alpha, last_crowd, was_served)
    other = 0.0 if n == 1 else (1.0 - p) / (n - 1)
    return ChoiceRule(stay_probability=p, other_probability=other)


def sample_choice(
    agent: AgentState,
    strategy: Strategy,
    alpha: float,
    n: int,
    rng: np.random.Generator,
) -> int:
    """Sample one agent's restaurant for the next day.

    The "other" branch draws a uniform index over n-1 slots and skips past
    yesterday's restaurant, so the stayed-at restaurant can never be picked
    through it.
    """
    if strategy is Strategy.RANDOM:
        return int(rng.integers(n))
    p = stay_probability(strategy, alpha, agent.last_crowd, agent.was_served)
    if rng.random() < p:
        return agent.last_restaurant
    other = int(rng.integers(n - 1))
    if other >= agent.last_restaurant:
        other += 1
    return other


def sample_choices_vectorized(
    strategy: Strategy,
    alpha: float,
    last_restaurant: np.ndarray,
    last_crowd: np.ndarray,
    was_served: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample all agents' choices for one day in a single vectorized pass.

    Applies exactly the per-agent rule of :func:`sample_choice`, consuming
    the stream in a fixed order: the random strategy draws n integers in
    agent order; otherwise one uniform per agent (agent order) decides
    stay/leave, then the leavers draw one integer each (agent order).
    """
    if strategy is Strategy.RANDOM:
        return rng.integers(0, n, size=n)
    if strategy is Strategy.CROWD_AVOIDING:
        p_stay = last_crowd.astype(np.float64) ** -alpha
    else:
        p_stay = 1.0 / last_crowd
        p_stay[was_served] = 1.0
    stay = rng.random(n) < p_stay
    choices = last_restaurant.copy()
    movers = np.flatnonzero(~stay)
    if movers.size:
        other = rng.integers(0, n - 1, size=movers.size)
        other += other >= last_restaurant[movers]
        choices[movers] = other
    return choices
