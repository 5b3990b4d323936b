"""Gymnasium-compatible environment class over the simulation core.

The binding owns no simulation logic: dynamics, rewards, and all RNG
live in the core package; this layer marshals flat float64 buffers,
exposes the action/observation spaces, and enforces handle hygiene
(exactly one live core instance per handle; a closed handle rejects
every call).  Seeding flows through ``reset(seed=...)`` into the core
generator streams -- the binding itself never draws random numbers.
"""

from __future__ import annotations

import weakref

import numpy as np

from contagionrl import Environment, SimConfig
from contagionrl.environment import observation_size
from contagionrl.errors import ConfigError

from .spaces import Box

# Live core instances, for leak diagnostics in tests.
_LIVE_CORES: "weakref.WeakSet[Environment]" = weakref.WeakSet()


class EnvConfigError(ValueError):
    """Invalid configuration, carrying the core error message."""


class ClosedEnvError(RuntimeError):
    """The handle was closed; no further calls are allowed."""


def _observation_space(n_humans: int) -> Box:
    low = np.empty(observation_size(n_humans))
    high = np.empty(observation_size(n_humans))
    low[0], high[0] = 0.0, 1.0  # adherence
    per_low = [-0.5, -0.5, 0.0, 0.0, 0.0]   # rel_x, rel_y, dist, infected, visible
    per_high = [0.5, 0.5, 1.0, 1.0, 1.0]
    for i in range(n_humans):
        low[1 + 5 * i:6 + 5 * i] = per_low
        high[1 + 5 * i:6 + 5 * i] = per_high
    return Box(low, high)


class ContagionEnv:
    """reset/step handle around one core simulation instance."""

    metadata = {"render_modes": ["rgb_array"]}

    def __init__(self, **config):
        try:
            sim_config = SimConfig().with_overrides(**_coerce(config))
        except ConfigError as exc:
            raise EnvConfigError(str(exc)) from exc
        self._core: Environment | None = Environment(sim_config)
        _LIVE_CORES.add(self._core)
        self.config = sim_config
        self.action_space = Box(low=[-1.0, -1.0, 0.0], high=[1.0, 1.0, 1.0])
        self.observation_space = _observation_space(sim_config.n_humans)
        self._last_observation: np.ndarray | None = None

    # -- lifecycle ---------------------------------------------------------

    @property
    def closed(self) -> bool:
        return self._core is None

    def close(self) -> None:
        self._core = None

    def _require_open(self) -> Environment:
        if self._core is None:
            raise ClosedEnvError("environment handle is closed")
        return self._core

    # -- environment API ---------------------------------------------------

    def reset(self, *, seed: int | None = None, options: dict | None = None):
        core = self._require_open()
        observation, info = core.reset(seed=seed)
        self._last_observation = observation
        return observation, info

    def step(self, action):
        core = self._require_open()
        action = np.asarray(action, dtype=np.float64).reshape(3)
        observation, reward, terminated, truncated, info = core.step(action)
        self._last_observation = observation
        return observation, reward, terminated, truncated, info

    def render(self):
        core = self._require_open()
        if core.config.render_mode != "rgb_array" or core.world is None:
            return None
        from contagionrl.render import render_frame
        return render_frame(core.world)

    def __repr__(self):
        state = "closed" if self.closed else "open"
        return f"ContagionEnv({state}, n_humans={self.config.n_humans})"


def _coerce(config: dict) -> dict:
    # Reject non-string keys early so the error names the offender.
    for key in config:
        if not isinstance(key, str):
            raise EnvConfigError(f"config keys must be strings, got {key!r}")
    return config


def live_core_count() -> int:
    """Number of core instances still reachable (leak diagnostics)."""
    return len(_LIVE_CORES)


# -- registry ---------------------------------------------------------------

ENV_ID = "ContagionRL-v0"
_REGISTRY: dict[str, type] = {}


def register(env_id: str, cls: type) -> None:
    _REGISTRY[env_id] = cls


def make(env_id: str, **config) -> ContagionEnv:
    if env_id not in _REGISTRY:
        raise KeyError(f"unknown environment id {env_id!r}; "
                       f"registered: {sorted(_REGISTRY)}")
    return _REGISTRY[env_id](**config)


register(ENV_ID, ContagionEnv)


def register_with_gymnasium() -> bool:
    """Register with the real gymnasium registry when it is installed."""
    try:
        import gymnasium
    except ImportError:
        return False
    try:
        gymnasium.register(id=ENV_ID,
                           entry_point="contagionrl_gym.env:ContagionEnv")
    except Exception:
        return False
    return True
