"""Simulation configuration: parameter schema, validation, parsing.

Config files are flat ``key=value`` text.  Keys match the dataclass
field names one to one; unknown keys are rejected.  Values may also be
supplied via ``CONTAGION_<KEY>`` environment variables and CLI flags
(precedence: defaults < file < environment < flags).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError

MOVEMENT_TYPES = ("continuous_random", "workplace_home_cycle")
REWARD_TYPES = (
    "constant",
    "reduce_infection",
    "combined",
    "max_nearest_distance",
    "potential_field",
)
REWARD_ABLATIONS = (
    "full",
    "no_magnitude",
    "no_direction",
    "no_movement",
    "no_adherence",
    "no_health",
    "no_susceptible_repulsion",
)
RENDER_MODES = (None, "rgb_array")

ENV_VAR_PREFIX = "CONTAGION_"


@dataclass(frozen=True)
class SimConfig:
    """Environment parameters with their default values.

    ``adherence_penalty_factor`` is parsed and stored for config-file
    fidelity but referenced by no implemented reward formula.
    """

    simulation_time: int = 512
    grid_size: int = 50
    n_humans: int = 40
    initial_infected: int = 10
    infection_rate: float = 0.5
    initial_agent_adherence: float = 0.0
    distance_decay: float = 0.3
    lethality_rate: float = 0.0
    immunity_loss_prob: float = 0.25
    recovery_rate: float = 0.1
    adherence_penalty_factor: float = 1.0
    adherence_effectiveness: float = 0.2
    movement_type: str = "continuous_random"
    movement_scale: float = 1.0
    visibility_radius: float = -1.0
    reinfection_count: int = 5
    safe_distance: float = 10.0
    initial_agent_distance: float = 5.0
    max_infection_distance: float = 10.0
    reward_function_type: str = "potential_field"
    reward_ablation: str = "full"
    render_mode: str | None = None
    cycle_period: int = 64
    work_anchor_mode: str = "shared"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        _require_int(self, "simulation_time", low=1)
        _require_int(self, "grid_size", low=1)
        _require_int(self, "n_humans", low=0)
        _require_int(self, "initial_infected", low=0)
        if self.initial_infected > self.n_humans:
            raise ConfigError(
                f"initial_infected={self.initial_infected} exceeds "
                f"n_humans={self.n_humans}; allowed range [0, n_humans]"
            )
        _require_float(self, "infection_rate", low=0.0, high=1.0)
        _require_float(self, "initial_agent_adherence", low=0.0, high=1.0)
        _require_float(self, "distance_decay", low=0.0)
        _require_float(self, "lethality_rate", low=0.0, high=1.0)
        _require_float(self, "immunity_loss_prob", low=0.0, high=1.0)
        _require_float(self, "recovery_rate", low=0.0, high=1.0)
        _require_float(self, "adherence_penalty_factor", low=1.0)
        _require_float(self, "adherence_effectiveness", low=0.0, high=1.0)
        _require_choice(self, "movement_type", MOVEMENT_TYPES)
        _require_float(self, "movement_scale", low=0.0, high=1.0)
        if self.visibility_radius != -1 and self.visibility_radius < 0:
            raise ConfigError(
                f"visibility_radius={self.visibility_radius} out of range; "
                "allowed: -1 (full visibility) or >= 0"
            )
        _require_int(self, "reinfection_count", low=0)
        _require_float(self, "safe_distance", low=0.0)
        _require_float(self, "initial_agent_distance", low=0.0)
        if self.max_infection_distance != -1 and self.max_infection_distance <= 0:
            raise ConfigError(
                f"max_infection_distance={self.max_infection_distance} out of "
                "range; allowed: -1 (unlimited) or > 0"
            )
        _require_choice(self, "reward_function_type", REWARD_TYPES)
        _require_choice(self, "reward_ablation", REWARD_ABLATIONS)
        if self.reward_ablation != "full" and self.reward_function_type != "potential_field":
            raise ConfigError(
                f"reward_ablation={self.reward_ablation!r} is only valid with "
                "reward_function_type=potential_field"
            )
        if self.render_mode not in RENDER_MODES:
            raise ConfigError(
                f"render_mode={self.render_mode!r} out of range; "
                "allowed: None or rgb_array"
            )
        _require_int(self, "cycle_period", low=1)
        _require_choice(self, "work_anchor_mode", ("shared", "per_human"))

    def with_overrides(self, **overrides) -> "SimConfig":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)


def _require_int(cfg: SimConfig, name: str, low: int) -> None:
    value = getattr(cfg, name)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{name}={value!r} must be an integer")
    if value < low:
        raise ConfigError(f"{name}={value} out of range; allowed: >= {low}")


def _require_float(cfg: SimConfig, name: str, low: float, high: float | None = None) -> None:
    value = getattr(cfg, name)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{name}={value!r} must be a number")
    if value < low or (high is not None and value > high):
        bound = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ConfigError(f"{name}={value} out of range; allowed: {bound}")


def _require_choice(cfg: SimConfig, name: str, choices: tuple) -> None:
    value = getattr(cfg, name)
    if value not in choices:
        raise ConfigError(
            f"{name}={value!r} out of range; allowed: {', '.join(map(str, choices))}"
        )


_FIELD_TYPES = {f.name: f.type for f in fields(SimConfig)}


def parse_value(key: str, raw: str):
    """Convert one key's string form (file/env/CLI) to its typed value."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key: {key}")
    raw = raw.strip()
    kind = _FIELD_TYPES[key]
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}={raw!r} must be an integer") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}={raw!r} must be a number") from None
    if key == "render_mode":
        return None if raw.lower() in ("none", "") else raw
    return raw


def parse_config_text(text: str) -> dict:
    """Parse flat key=value config text into a typed override mapping."""
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        overrides[key] = parse_value(key, raw)
    return overrides


def env_var_overrides(environ=None) -> dict:
    """Collect CONTAGION_<KEY> environment variable overrides."""
    environ = os.environ if environ is None else environ
    overrides = {}
    for name, raw in environ.items():
        if not name.startswith(ENV_VAR_PREFIX):
            continue
        key = name[len(ENV_VAR_PREFIX):].lower()
        overrides[key] = parse_value(key, raw)
    return overrides


def load_config(path: str | None = None, overrides: dict | None = None,
                use_env: bool = True) -> SimConfig:
    """Build a validated SimConfig from file, environment, and overrides."""
    merged: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            merged.update(parse_config_text(fh.read()))
    if use_env:
        merged.update(env_var_overrides())
    if overrides:
        for key, value in overrides.items():
            if isinstance(value, str):
                value = parse_value(key, value)
            merged[key] = value
    return SimConfig().with_overrides(**merged)
