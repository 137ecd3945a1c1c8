"""Monte Carlo laboratory for the Kolkata Paise Restaurant game."""

from .model import (
    AgentState,
    DayRecord,
    EnsembleSummary,
    RunResult,
    RunSummary,
    SimulationConfig,
    Strategy,
)

__all__ = [
    "AgentState",
    "DayRecord",
    "EnsembleSummary",
    "RunResult",
    "RunSummary",
    "SimulationConfig",
    "Strategy",
]
