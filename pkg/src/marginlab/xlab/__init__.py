"""Experiment harness: parameter resolvers, scenario runners and reports."""

from .resolvers import resolve_theorem1_params, resolve_theorem2_params
from .scenarios import ScenarioConfig, run_scenario, wilson_interval

__all__ = ["ScenarioConfig", "resolve_theorem1_params", "resolve_theorem2_params",
           "run_scenario", "wilson_interval"]
