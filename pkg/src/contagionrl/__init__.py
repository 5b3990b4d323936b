"""Deterministic spatial SIRS+D epidemic simulation with a learning-agent
interface, baseline policies, and a batch evaluation harness."""

from .baselines import (greedy_action, make_policy, random_action,
                        stationary_action)
from .config import SimConfig, load_config
from .environment import (Environment, StepOutcome, clamp_action,
                          effective_beta, observation_size, observe)
from .epidemic import (Compartment, EpidemicParams, WorldState, exposure,
                       infection_probability, initialize, reinfect_if_extinct,
                       step_compartments)
from .errors import ConfigError, PlacementError, TerminalStepError
from .geometry import (max_grid_distance, toroidal_distance, wrap_position,
                       wrapped_delta)
from .rewards import (PotentialFieldParams, combined_reward, constant_reward,
                      max_nearest_distance_reward, potential_field_reward,
                      potential_force, reduce_infection_reward)
from .stats import (SampleSet, TestResult, bonferroni, bootstrap_ci,
                    episode_metrics, mann_whitney_u)

__version__ = "0.1.0"

__all__ = [
    "SimConfig", "load_config", "Environment", "StepOutcome", "WorldState",
    "Compartment", "EpidemicParams", "ConfigError", "PlacementError",
    "TerminalStepError", "exposure", "infection_probability", "initialize",
    "step_compartments", "reinfect_if_extinct", "observe", "observation_size",
    "clamp_action", "effective_beta", "wrapped_delta", "toroidal_distance",
    "max_grid_distance", "wrap_position", "PotentialFieldParams",
    "constant_reward", "reduce_infection_reward", "combined_reward",
    "max_nearest_distance_reward", "potential_force", "potential_field_reward",
    "stationary_action", "random_action", "greedy_action", "make_policy",
    "SampleSet", "TestResult", "mann_whitney_u", "bonferroni", "bootstrap_ci",
    "episode_metrics",
]
