"""Monte-Carlo simulation of dynamic team composition, coordination
protocols, and individual learning on NK performance landscapes."""

__version__ = "0.1.0"

from .engine import (
    PHASES,
    PeriodRecord,
    RoundResult,
    ScenarioConfig,
    ScenarioResult,
    enumerate_scenarios,
    run_grid,
    run_round,
    run_scenario,
)
from .errors import ConfigError
from .metrics import PRESETS, ScenarioSummary, aggregate, summarize

__all__ = [
    "PHASES",
    "PRESETS",
    "ConfigError",
    "PeriodRecord",
    "RoundResult",
    "ScenarioConfig",
    "ScenarioResult",
    "ScenarioSummary",
    "aggregate",
    "enumerate_scenarios",
    "run_grid",
    "run_round",
    "run_scenario",
    "summarize",
    "__version__",
]
