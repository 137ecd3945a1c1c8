import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpr_lab.engine import (
    WorldState,
    detect_convergence,
    init_day_one,
    run,
    step_day,
)
from kpr_lab.model import DayRecord, SimulationConfig, Strategy

CA = Strategy.CROWD_AVOIDING
GCA = Strategy.GREEDY_CROWD_AVOIDING
RANDOM = Strategy.RANDOM


def assert_day_invariants(record: DayRecord, state: WorldState, n: int) -> None:
    hist = record.crowd_histogram
    assert sum(size * count for size, count in hist.items()) == n
    assert record.served_count == sum(c for size, c in hist.items() if size >= 1)
    assert 0.0 <= record.utilization <= 1.0
    assert record.utilization == record.served_count / n
    assert state.crowds.sum() == n
    assert int(state.was_served.sum()) == record.served_count
    occupied = np.flatnonzero(state.crowds)
    assert np.array_equal(np.flatnonzero(state.served_agent >= 0), occupied)
    winners = state.served_agent[occupied]
    assert np.array_equal(state.last_restaurant[winners], occupied)
    assert state.was_served[winners].all()
    assert np.array_equal(state.last_crowd, state.crowds[state.last_restaurant])
    assert (state.success_count <= state.day).all()


class TestDayOne:
    def test_single_agent(self):
        cfg = SimulationConfig(n=1, strategy=RANDOM)
        state, record = init_day_one(cfg, np.random.default_rng(0))
        assert list(state.crowds) == [1]
        assert record.served_count == 1
        assert record.utilization == 1.0

    def test_two_agent_expectation(self):
        # 4 equally likely joint choices: two collisions (f=1/2), two splits (f=1)
        cfg = SimulationConfig(n=2, strategy=RANDOM)
        rng = np.random.default_rng(42)
        draws = 20_000
        vals = np.empty(draws)
        for i in range(draws):
            _, record = init_day_one(cfg, rng)
            vals[i] = record.utilization
        se = vals.std(ddof=1) / np.sqrt(draws)
        assert abs(vals.mean() - 0.75) <= 3 * se

    def test_agents_see_their_own_crowd(self):
        cfg = SimulationConfig(n=30, strategy=CA, seed=3)
        state, _ = init_day_one(cfg, np.random.default_rng(3))
        assert (state.last_crowd >= 1).all()
        assert state.success_count.sum() == int(state.was_served.sum())


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=40),
    strategy=st.sampled_from(list(Strategy)),
    alpha=st.sampled_from([0.5, 1.0, 2.0]),
    seed=st.integers(min_value=0, max_value=2**32),
    days=st.integers(min_value=1, max_value=12),
)
def test_conservation_identities_every_day(n, strategy, alpha, seed, days):
    cfg = SimulationConfig(n=n, strategy=strategy, alpha=alpha, seed=seed)
    rng = np.random.default_rng(seed)
    state, record = init_day_one(cfg, rng)
    assert_day_invariants(record, state, n)
    for _ in range(days):
        record = step_day(state, cfg, rng)
        assert_day_invariants(record, state, n)


@settings(max_examples=15, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=60),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_greedy_occupancy_never_shrinks(n, seed):
    cfg = SimulationConfig(n=n, strategy=GCA, seed=seed)
    rng = np.random.default_rng(seed)
    state, record = init_day_one(cfg, rng)
    occupied = set(np.flatnonzero(state.crowds))
    for _ in range(25):
        record = step_day(state, cfg, rng)
        now = set(np.flatnonzero(state.crowds))
        assert occupied <= now
        occupied = now


def test_crowd_avoiding_fixed_point_when_all_alone():
    n = 12
    assignment = np.arange(n)
    state = WorldState(
        day=1,
        last_restaurant=assignment.copy(),
        last_crowd=np.ones(n, dtype=np.int64),
        was_served=np.ones(n, dtype=bool),
        success_count=np.ones(n, dtype=np.int64),
        crowds=np.ones(n, dtype=np.int64),
        served_agent=assignment.copy(),
    )
    cfg = SimulationConfig(n=n, strategy=CA)
    record = step_day(state, cfg, np.random.default_rng(0))
    assert np.array_equal(state.last_restaurant, assignment)
    assert record.utilization == 1.0


def test_replaying_a_seed_is_bit_identical():
    for strategy in (RANDOM, CA, GCA):
        cfg = SimulationConfig(n=37, strategy=strategy, seed=99, max_days=60)
        a = run(cfg)
        b = run(cfg)
        assert np.array_equal(a.f_series, b.f_series)
        assert np.array_equal(a.final_rates, b.final_rates)
        assert (a.tau, a.f_s, a.converged) == (b.tau, b.f_s, b.converged)


def test_alpha_does_not_affect_random_strategy():
    runs = [
        run(SimulationConfig(n=23, strategy=RANDOM, alpha=alpha, seed=17, max_days=50))
        for alpha in (0.25, 1.0, 3.0)
    ]
    for other in runs[1:]:
        assert np.array_equal(runs[0].f_series, other.f_series)
        assert np.array_equal(runs[0].final_rates, other.final_rates)


class TestDetectConvergence:
    def cfg(self, **kwargs):
        base = {"n": 100, "strategy": CA}
        base.update(kwargs)
        return SimulationConfig(**base)

    def test_greedy_constant_full_series(self):
        tau, f_s, converged = detect_convergence(np.ones(30), GCA, self.cfg())
        assert (tau, f_s, converged) == (0, 1.0, True)

    def test_greedy_first_full_day(self):
        series = np.array([0.6, 0.8, 1.0, 1.0])
        tau, f_s, converged = detect_convergence(series, GCA, self.cfg())
        assert (tau, f_s, converged) == (2, 1.0, True)

    def test_greedy_unconverged(self):
        series = np.array([0.6, 0.8, 0.9])
        tau, f_s, converged = detect_convergence(series, GCA, self.cfg())
        assert not converged
        assert tau == 3

    def test_constant_series_converges_immediately(self):
        series = np.full(100, 0.8)
        tau, f_s, converged = detect_convergence(series, CA, self.cfg())
        assert (tau, converged) == (0, True)
        assert f_s == pytest.approx(0.8)

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            detect_convergence(np.array([]), CA, self.cfg())

    def test_degenerate_tail_window_rejected(self):
        with pytest.raises(ValueError):
            detect_convergence(np.array([0.5, 0.6]), CA, self.cfg())

    def test_random_large_n_converges_in_zero_time(self):
        cfg = SimulationConfig(n=6400, strategy=RANDOM, seed=8, max_days=300)
        result = run(cfg)
        assert result.tau == 0
        assert abs(result.f_s - 0.632) <= 0.01


class TestRun:
    def test_greedy_reaches_exactly_one(self):
        result = run(SimulationConfig(n=50, strategy=GCA, seed=12))
        assert result.converged
        assert result.f_series[-1] == 1.0
        assert result.tau == result.days - 1
        assert np.all(np.diff(result.f_series) >= 0)

    def test_greedy_unconverged_reports_max_days(self):
        result = run(SimulationConfig(n=50, strategy=GCA, seed=12, max_days=3))
        assert not result.converged
        assert result.tau == 3
        assert result.days == 3

    def test_series_bounded_by_horizon(self):
        result = run(SimulationConfig(n=25, strategy=CA, seed=5, max_days=40))
        assert result.days == 40
        assert np.all((result.f_series >= 0) & (result.f_series <= 1))
        assert np.all((result.final_rates >= 0) & (result.final_rates <= 100))

    def test_history_recording_shape(self):
        cfg = SimulationConfig(n=20, strategy=GCA, seed=9, record_history=True)
        result = run(cfg)
        assert result.success_history is not None
        assert result.success_history.shape == (result.days, 20)
        assert result.success_history.dtype == bool

    def test_final_rates_match_history_recount(self):
        # the greedy snapshot path and the recorded-history path must agree
        lean = run(SimulationConfig(n=40, strategy=GCA, seed=21))
        full = run(SimulationConfig(n=40, strategy=GCA, seed=21, record_history=True))
        assert lean.tau == full.tau
        assert np.array_equal(lean.final_rates, full.final_rates)
        day = max(full.tau, 1)
        recount = 100.0 * full.success_history[:day].sum(axis=0) / day
        assert np.allclose(full.final_rates, recount)

    def test_crowd_avoiding_final_rates_at_tau(self):
        result = run(
            SimulationConfig(n=30, strategy=CA, seed=4, max_days=60, record_history=True)
        )
        day = max(result.tau, 1)
        recount = 100.0 * result.success_history[:day].sum(axis=0) / day
        assert np.allclose(result.final_rates, recount)
