"""Gymnasium-compatible bindings for the contagionrl simulation core."""

from .env import (ENV_ID, ClosedEnvError, ContagionEnv, EnvConfigError,
                  live_core_count, make, register, register_with_gymnasium)
from .spaces import Box

register_with_gymnasium()

__all__ = ["ContagionEnv", "Box", "make", "register", "ENV_ID",
           "EnvConfigError", "ClosedEnvError", "live_core_count",
           "register_with_gymnasium"]
