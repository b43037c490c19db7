"""Scenario configuration, Monte Carlo runner, CSV output and command line."""

from .presets import PRESETS, preset
from .runner import ScenarioResult, TrialResult, run_scenario
from .scenario import Scenario, load_scenario, scenario_from_dict

__all__ = ["PRESETS", "preset", "ScenarioResult", "TrialResult", "run_scenario", "Scenario",
           "load_scenario", "scenario_from_dict"]
