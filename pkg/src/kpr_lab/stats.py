"""Estimators and analytic baselines: occupancy formulas, world lines,
dispersion, finite-size extrapolation, and small-alpha scaling diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RunResult


def exact_random_utilization(n: int) -> float:
    """Expected fraction of restaurants occupied when n agents pick uniformly.

    Standard occupancy identity: 1 - (1 - 1/n)^n, tending to 1 - 1/e for
    large n.  Serves as the closed-form check for day-1 utilization.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 - (1.0 - 1.0 / n) ** n


def poisson_limit_pmf(k: int) -> float:
    """Large-n limit of the crowd-size distribution: e^-1 / k!."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.exp(-1.0) / math.factorial(k)


@dataclass(frozen=True)
class WorldLine:
    """One agent's cumulative success percentage, day by day."""

    agent_id: int
    days: np.ndarray
    pct: np.ndarray

    @property
    def series(self) -> list[tuple[int, float]]:
        return list(zip(self.days.tolist(), self.pct.tolist()))

    @property
    def final_pct(self) -> float:
        return float(self.pct[-1])


def world_lines(result: RunResult) -> list[WorldLine]:
    """Cumulative success trajectories for every agent, day 1 to max(tau, 1).

    Requires the run to have recorded per-day service flags
    (config.record_history).
    """
    if result.success_history is None:
        raise ValueError("run did not record history; enable record_history")
    upto = min(max(result.tau, 1), len(result.success_history))
    flags = result.success_history[:upto]
    days = np.arange(1, upto + 1)
    pct = 100.0 * np.cumsum(flags, axis=0) / days[:, None]
    return [
        WorldLine(agent_id=i, days=days, pct=pct[:, i])
        for i in range(flags.shape[1])
    ]


def dispersion_summary(lines: list[WorldLine]) -> tuple[float, float, float]:
    """(min, max, spread) of the final cumulative success percentages."""
    if not lines:
        raise ValueError("no world lines given")
    length = len(lines[0].pct)
    if any(len(line.pct) != length for line in lines):
        raise ValueError("world lines end at different days")
    finals = np.array([line.final_pct for line in lines])
    lo, hi = float(finals.min()), float(finals.max())
    return lo, hi, hi - lo


@dataclass(frozen=True)
class SweepRow:
    """Ensemble statistics for one value of the swept variable."""

    value: float
    fs_mean: float
    fs_std: float
    tau_mean: float
    tau_std: float
    runs: int
    converged_fraction: float
    dispersion_min_rate_mean: float


@dataclass(frozen=True)
class SweepTable:
    """Rows of ensemble statistics, sorted by the swept variable."""

    variable: str
    rows: tuple[SweepRow, ...]

    def __post_init__(self) -> None:
        values = [row.value for row in self.rows]
        if sorted(values) != values:
            raise ValueError("sweep rows must be sorted by value")


def estimate_fs_extrapolation(table: SweepTable) -> tuple[float, float]:
    """Least-squares fit of fs_mean against 1/N; the intercept estimates the
    infinite-size saturation value.
    """
    rows = list(table.rows)
    if len(rows) < 3:
        raise ValueError(f"need at least 3 rows to extrapolate, got {len(rows)}")
    x = np.array([1.0 / row.value for row in rows])
    y = np.array([row.fs_mean for row in rows])
    if np.ptp(x) == 0:
        raise ValueError("all sweep values are equal; cannot extrapolate")
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept), float(slope)


@dataclass(frozen=True)
class AlphaScalingRow:
    """Per-row diagnostics for the small-alpha limit laws."""

    alpha: float
    fs_mean: float
    fs_vs_one_minus_alpha: float
    tau_mean: float
    tau_alpha_product: float


def fit_alpha_scaling(table: SweepTable) -> list[AlphaScalingRow]:
    """Diagnostics for an alpha sweep: how close f_s is to 1 - alpha and how
    constant tau * alpha stays.  Reports, does not judge: the limit laws are
    asymptotic in alpha -> 0.
    """
    rows = []
    for row in table.rows:
        rows.append(
            AlphaScalingRow(
                alpha=row.value,
                fs_mean=row.fs_mean,
                fs_vs_one_minus_alpha=abs(row.fs_mean - (1.0 - row.value)),
                tau_mean=row.tau_mean,
                tau_alpha_product=row.tau_mean * row.value,
            )
        )
    return rows
