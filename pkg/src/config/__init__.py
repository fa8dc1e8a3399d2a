"""
Configuration Module
Scenario file parsing and validation
"""

from .manager import ConfigManager, ScenarioConfig, parse_config, render_config

__all__ = [
    "ConfigManager",
    "ScenarioConfig",
    "parse_config",
    "render_config",
]
