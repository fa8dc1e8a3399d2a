"""
Configuration Management System
Loads and validates flat key = value scenario files
"""

import configparser
import json
import math
import os
from dataclasses import dataclass, asdict, field, fields, replace
from typing import Any, Dict, Optional, Tuple, Union

from core.model import (
    FREQUENCY_FIELDS, SystemParams, coherence_rates, reference_preset, param_names,
)
from core.qop import BELL_LABELS
from utils.errors import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)

SECTION = "scenario"
COMMANDS = ("evolve", "steady", "rates", "benchmarks", "spectrum", "optimize", "sweep")
STATES = ("mixture4", "ground") + BELL_LABELS
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class ScenarioConfig:
    command: str = "evolve"
    params: SystemParams = field(default_factory=lambda: reference_preset(1.0))
    initial_state: str = "mixture4"
    t_end: float = 1000.0
    sample_interval: float = 1.0
    # sweep
    sweep: Tuple[str, ...] = ()
    grid: Tuple[float, ...] = ()
    grid2: Tuple[float, ...] = ()
    optimize_each: bool = False
    # optimize
    t_target: float = 1000.0
    budget: int = 400
    free: Tuple[str, ...] = ("omega_bar", "epsilon", "delta_c")
    restarts: int = 4
    search_horizon: Optional[float] = None
    optimize_first: bool = False
    # steady state
    tol: float = 1e-5
    t_max: float = 2000.0
    # spectrum
    sector: int = 3
    spectrum_grid: Tuple[float, ...] = tuple(0.25 * k for k in range(1, 25))
    # coherence times; need ghz
    ghz: Optional[float] = None
    t1_us: Optional[float] = None
    t2_us: Optional[float] = None
    # run
    output_dir: str = "results"
    seed: int = 0
    jobs: Optional[int] = None
    svg: bool = False
    log_level: str = "INFO"
    structured_logs: bool = False

    def with_overrides(self, **changes) -> "ScenarioConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        updated = replace(self, **changes)
        _validate_config(updated, {})
        return updated

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["params"] = self.params.to_dict()
        return out


SCENARIO_KEYS = tuple(f.name for f in fields(ScenarioConfig) if f.name != "params")


def _parse_config_value(value: str) -> Union[str, int, float, bool, list]:
    """Parse configuration value to appropriate type"""
    value = value.strip()
    if value.lower() in ("true", "false", "yes", "no", "on", "off"):
        return value.lower() in ("true", "yes", "on")

    try:
        return int(value)
    except ValueError:
        pass

    try:
        return float(value)
    except ValueError:
        pass

    # Comma-separated lists, also accepting JSON-style brackets
    if "," in value or value.startswith("["):
        try:
            return json.loads(value)
        except ValueError:
            return [_parse_config_value(item) for item in value.strip("[]").split(",") if item.strip()]

    return value


def _line_map(text: str) -> Dict[str, int]:
    lines = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith(("#", ";")) or "=" not in stripped:
            continue
        lines.setdefault(stripped.split("=", 1)[0].strip(), number)
    return lines


def _as_list(key: str, value: Any, line: Optional[int]) -> list:
    return value if isinstance(value, list) else [value]


def _as_floats(key: str, value: Any, line: Optional[int]) -> Tuple[float, ...]:
    out = []
    for item in _as_list(key, value, line):
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ConfigError(f"{key} must be a list of numbers, got {item!r}", line=line, key=key)
        out.append(float(item))
    return tuple(out)


def _as_names(key: str, value: Any, line: Optional[int]) -> Tuple[str, ...]:
    names = tuple(str(item).strip() for item in _as_list(key, value, line))
    if any(not name for name in names):
        raise ConfigError(f"{key} contains an empty name", line=line, key=key)
    return names


def _as_number(key: str, value: Any, line: Optional[int], integer: bool = False) -> Union[int, float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", line=line, key=key)
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {value!r}", line=line, key=key)
    if integer:
        if int(value) != value:
            raise ConfigError(f"{key} must be an integer, got {value!r}", line=line, key=key)
        return int(value)
    return float(value)


def _coerce(key: str, value: Any, line: Optional[int]) -> Any:
    if key in ("grid", "grid2", "spectrum_grid"):
        return _as_floats(key, value, line)
    if key in ("sweep", "free"):
        return _as_names(key, value, line)
    if key in ("optimize_each", "optimize_first", "svg", "structured_logs"):
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false, got {value!r}", line=line, key=key)
        return value
    if key in ("budget", "restarts", "seed", "sector", "jobs"):
        return _as_number(key, value, line, integer=True)
    if key in ("command", "initial_state", "output_dir", "log_level"):
        return str(value)
    return _as_number(key, value, line)


def _validate_config(config: ScenarioConfig, lines: Dict[str, int]):
    def fail(key: str, message: str):
        raise ConfigError(message, line=lines.get(key), key=key)

    if config.command not in COMMANDS:
        fail("command", f"unknown command {config.command!r}; expected one of {', '.join(COMMANDS)}")
    if config.initial_state not in STATES:
        fail("initial_state", f"unknown initial state {config.initial_state!r}")
    if not config.t_end > 0:
        fail("t_end", f"t_end must be positive, got {config.t_end}")
    if not 0 < config.sample_interval <= config.t_end:
        fail("sample_interval", f"sample_interval must be in (0, t_end], got {config.sample_interval}")
    if not config.t_target > 0:
        fail("t_target", f"t_target must be positive, got {config.t_target}")
    if not config.t_max > 0:
        fail("t_max", f"t_max must be positive, got {config.t_max}")
    if not config.tol > 0:
        fail("tol", f"tol must be positive, got {config.tol}")
    if config.budget < 50:
        fail("budget", f"budget must be at least 50, got {config.budget}")
    if config.restarts < 1:
        fail("restarts", f"restarts must be at least 1, got {config.restarts}")
    if config.sector < 0:
        fail("sector", f"sector must be non-negative, got {config.sector}")
    if config.seed < 0:
        fail("seed", f"seed must be a non-negative integer, got {config.seed}")
    if config.search_horizon is not None and not config.search_horizon > 0:
        fail("search_horizon", f"search_horizon must be positive, got {config.search_horizon}")
    if config.jobs is not None and config.jobs < 1:
        fail("jobs", f"jobs must be at least 1, got {config.jobs}")
    if config.log_level.upper() not in LOG_LEVELS:
        fail("log_level", f"unknown log level {config.log_level!r}")
    for name in config.free:
        if name not in FREQUENCY_FIELDS:
            fail("free", f"{name} cannot be optimized; choose from {', '.join(FREQUENCY_FIELDS)}")
    if not config.spectrum_grid:
        fail("spectrum_grid", "spectrum_grid must not be empty")

    known = set(param_names())
    for name in config.sweep:
        if name not in known:
            fail("sweep", f"unknown sweep parameter {name!r}")
    if len(config.sweep) > 2:
        fail("sweep", f"at most two sweep parameters, got {len(config.sweep)}")
    if config.command == "sweep":
        if not config.sweep:
            fail("sweep", "command = sweep needs a sweep parameter")
        if not config.grid:
            fail("grid", "command = sweep needs a non-empty grid")
        if len(config.sweep) == 2 and not config.grid2:
            fail("grid2", "a two-parameter sweep needs a non-empty grid2")


def _build_params(values: Dict[str, Any], lines: Dict[str, int]) -> SystemParams:
    params = reference_preset(1.0)
    if "A" in values:
        anharmonicity = _as_number("A", values["A"], lines.get("A"))
        try:
            params = reference_preset(anharmonicity)
        except ConfigError as exc:
            raise ConfigError(str(exc), line=lines.get("A"), key="A") from exc

    overrides = {k: v for k, v in values.items() if k in param_names() and k != "A"}

    if values.get("t1_us") is not None or values.get("t2_us") is not None:
        for key in ("t1_us", "t2_us", "ghz"):
            if values.get(key) is None:
                raise ConfigError(f"coherence times need t1_us, t2_us and ghz; {key} missing",
                                  line=lines.get("t1_us", lines.get("t2_us")), key=key)
        for key in ("gamma", "gamma_phi"):
            if key in overrides:
                raise ConfigError(f"{key} conflicts with t1_us/t2_us", line=lines.get(key), key=key)
        try:
            gamma, gamma_phi = coherence_rates(values["t1_us"], values["t2_us"], values["ghz"])
        except ConfigError as exc:
            raise ConfigError(str(exc), line=lines.get("t1_us"), key="t1_us") from exc
        overrides.update(gamma=gamma, gamma_phi=gamma_phi)
        logger.info(f"Coherence times give gamma={gamma:.4g} g, gamma_phi={gamma_phi:.4g} g")

    for key in ("d_t", "d_c"):
        if key in overrides:
            overrides[key] = _as_number(key, overrides[key], lines.get(key), integer=True)

    try:
        return params.replace(**overrides)
    except ConfigError as exc:
        raise ConfigError(str(exc), line=lines.get(exc.key), key=exc.key) from exc


def parse_config(text: str) -> ScenarioConfig:
    """Parse scenario text into a validated ScenarioConfig"""
    parser = configparser.ConfigParser(
        interpolation=None,
        delimiters=("=",),
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#",),
        strict=True,
    )
    parser.optionxform = str
    try:
        parser.read_string(f"[{SECTION}]\n{text}")
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", line=exc.lineno - 1, key=exc.option) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] - 1 if exc.errors else None
        raise ConfigError("unparsable line; expected key = value", line=line) from exc
    except configparser.Error as exc:
        raise ConfigError(f"unparsable configuration: {exc}") from exc

    lines = _line_map(text)
    allowed = set(SCENARIO_KEYS) | set(param_names())
    values: Dict[str, Any] = {}
    for key, raw in parser[SECTION].items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", line=lines.get(key), key=key)
        if not raw.strip():
            raise ConfigError(f"{key} has no value", line=lines.get(key), key=key)
        value = _parse_config_value(raw)
        if key in param_names():
            values[key] = value
        else:
            values[key] = _coerce(key, value, lines.get(key))

    params = _build_params(values, lines)
    scenario = {k: v for k, v in values.items() if k in SCENARIO_KEYS}
    config = ScenarioConfig(params=params, **scenario)
    config.log_level = config.log_level.upper()
    _validate_config(config, lines)
    return config


def render_config(config: ScenarioConfig) -> str:
    """Flat key = value text that parse_config reads back"""
    out = []
    for key in SCENARIO_KEYS:
        value = getattr(config, key)
        if value is None or key in ("t1_us", "t2_us"):
            continue
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
            if not value:
                continue
        elif isinstance(value, bool):
            value = str(value).lower()
        out.append(f"{key} = {value}")
    out.extend(f"{key} = {value!r}" for key, value in config.params.to_dict().items())
    return "\n".join(out) + "\n"


class ConfigManager:
    """Scenario file loader"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.config = ScenarioConfig()

    def load_config(self, config_path: Optional[str] = None) -> ScenarioConfig:
        if config_path:
            self.config_path = config_path

        if self.config_path is None:
            logger.info("No scenario file given, using defaults")
            self.config = ScenarioConfig()
            return self.config

        if not os.path.exists(self.config_path):
            raise ConfigError(f"config file not found: {self.config_path}")

        with open(self.config_path, "r", encoding="utf-8") as f:
            text = f.read()

        self.config = parse_config(text)
        logger.info(f"Configuration loaded from {self.config_path}")
        return self.config

    def save_config(self, config_path: Optional[str] = None) -> str:
        path = config_path or self.config_path
        if path is None:
            raise ConfigError("no path to save the configuration to")
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(render_config(self.config))
        logger.info(f"Configuration saved to {path}")
        return path
