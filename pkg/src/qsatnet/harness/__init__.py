"""Configuration, sweep expansion, execution and export."""
from .config import ConfigError, ScenarioConfig, load_config
from .export import export_bundle
from .runner import ResultBundle, ScenarioError, ScenarioResult, run_scenario, run_sweep
from .sweep import Scenario, enumerate_sweep, filter_scenarios

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "export_bundle", "ResultBundle",
           "ScenarioError", "ScenarioResult", "run_scenario", "run_sweep", "Scenario",
           "enumerate_sweep", "filter_scenarios"]
