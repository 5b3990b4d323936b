"""The step/reset cycle: actions, movement, disease, observation, reward.

Step order is fixed: apply the agent's action, move the humans, run the
synchronous compartment transitions (the agent draws against its
adherence-modulated rate), apply the reinfection mechanism, score the
reward on the post-transition state, then build the observation.

Observations are flat float64 vectors of length ``1 + 5 * n_humans``:
the agent's adherence followed by one ``(rel_x, rel_y, norm_dist,
infected_flag, visible_flag)`` block per human in id order.  Relative
positions are wrapped displacements divided by the grid size (range
[-0.5, 0.5)); distances are divided by the toroidal diagonal
(G/2) * sqrt(2).  Humans beyond the visibility radius have all four
leading features zeroed and the flag 0, so the vector keeps a constant
shape under partial observability; dead humans stay visible with
infected_flag 0.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import geometry, movement, rewards
from .config import SimConfig
from .epidemic import (Compartment, EpidemicParams, WorldState, initialize,
                       reinfect_if_extinct, step_compartments)
from .errors import TerminalStepError

ACTION_LOW = np.array([-1.0, -1.0, 0.0])
ACTION_HIGH = np.array([1.0, 1.0, 1.0])

FEATURES_PER_HUMAN = 5


def observation_size(n_humans: int) -> int:
    return 1 + FEATURES_PER_HUMAN * n_humans


def clamp_action(action) -> np.ndarray:
    """Clamp (dx, dy, alpha) into the action box; never rejects."""
    action = np.asarray(action, dtype=float).reshape(3)
    return np.clip(action, ACTION_LOW, ACTION_HIGH)


def effective_beta(beta: float, alpha: float, adherence_effectiveness: float) -> float:
    """Adherence-modulated infection rate.

    beta * (eps + (1 - eps) * (1 - alpha)): equals beta at zero
    adherence and beta * eps at full adherence, decreasing in between.
    """
    return beta * (adherence_effectiveness
                   + (1.0 - adherence_effectiveness) * (1.0 - alpha))


def apply_agent_action(world: WorldState, action: np.ndarray,
                       movement_scale: float = 1.0) -> None:
    """Move the agent by the (scaled, wrapped) action and set adherence.

    The default scale of 1 applies the movement components directly, so
    the maximal step length is sqrt(2) on diagonals.
    """
    world.agent_pos = geometry.wrap_position(
        world.agent_pos + movement_scale * action[:2], world.grid_size)
    world.agent_adherence = float(action[2])


def observe(world: WorldState, visibility_radius: float) -> np.ndarray:
    """Flat observation vector with visibility masking applied."""
    n = world.n_humans
    obs = np.zeros(observation_size(n))
    obs[0] = world.agent_adherence
    if n == 0:
        return obs
    delta = geometry.wrapped_delta(world.agent_pos, world.positions,
                                   world.grid_size)
    dist = np.linalg.norm(delta, axis=-1)
    features = np.zeros((n, FEATURES_PER_HUMAN))
    features[:, 0:2] = delta / world.grid_size
    features[:, 2] = dist / geometry.max_grid_distance(world.grid_size)
    features[:, 3] = world.compartments == Compartment.I
    if visibility_radius == -1:
        visible = np.ones(n, dtype=bool)
    else:
        visible = dist <= visibility_radius
    features[~visible] = 0.0
    features[:, 4] = visible
    obs[1:] = features.ravel()
    return obs


class StepOutcome(NamedTuple):
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool
    info: dict


class Environment:
    """One episode-at-a-time simulation with the reset/step contract.

    A single instance is not thread-safe; run parallel episodes on
    separate instances with independent seeds.
    """

    def __init__(self, config: SimConfig | None = None, **overrides):
        if config is None:
            config = SimConfig()
        if overrides:
            config = config.with_overrides(**overrides)
        self.config = config
        self.params = EpidemicParams.from_config(config)
        self.world: WorldState | None = None
        self._movement_model = None
        self._rngs: dict[str, np.random.Generator] = {}
        self._terminated = False
        self._truncated = False
        self.duration: int | None = None

    @property
    def policy_rng(self) -> np.random.Generator:
        """Dedicated stream for policies, derived from the reset seed."""
        self._require_reset()
        return self._rngs["policy"]

    def reset(self, seed: int | None = None) -> tuple[np.ndarray, dict]:
        """Start a fresh episode; equal seeds yield byte-identical runs."""
        seq = np.random.SeedSequence(seed)
        names = ("placement", "movement", "transitions", "policy")
        self._rngs = {name: np.random.default_rng(child)
                      for name, child in zip(names, seq.spawn(len(names)))}
        self.world = initialize(self.config, self._rngs["placement"])
        self._movement_model = movement.build_movement_model(
            self.config, self.world, self._rngs["placement"])
        self._terminated = False
        self._truncated = False
        self.duration = None
        info = {"counts": self.world.counts(), "p_inf": 0.0}
        return observe(self.world, self.config.visibility_radius), info

    def step(self, action) -> StepOutcome:
        """Advance one timestep; raises once the episode has ended."""
        self._require_reset()
        if self._terminated or self._truncated:
            raise TerminalStepError("episode has ended; call reset() first")
        world = self.world
        assert world.agent_compartment == Compartment.S, \
            "agent must be susceptible while the episode is live"

        act = clamp_action(action)
        world.t += 1
        apply_agent_action(world, act)
        movement.move_humans(world, self._movement_model, self._rngs["movement"])

        beta_eff = effective_beta(self.config.infection_rate,
                                  world.agent_adherence,
                                  self.config.adherence_effectiveness)
        report = step_compartments(world, self.params,
                                   self._rngs["transitions"], beta_eff)
        infected_before = int(np.count_nonzero(world.compartments == Compartment.I))
        reinfection_ok = reinfect_if_extinct(world, self.params,
                                             self._rngs["transitions"])
        infected_after = int(np.count_nonzero(world.compartments == Compartment.I))
        new_infections = report.new_infections + (infected_after - infected_before)

        reward = rewards.compute_reward(
            self.config.reward_function_type, self.config.reward_ablation,
            world, report.agent_infection_probability, act[:2],
            self.config.max_infection_distance)

        obs = observe(world, self.config.visibility_radius)
        agent_infected = world.agent_compartment == Compartment.I
        self._terminated = agent_infected or not reinfection_ok
        self._truncated = (not self._terminated
                           and world.t >= self.config.simulation_time)

        info = {
            "counts": world.counts(),
            "p_inf": report.agent_infection_probability,
            "new_infections": new_infections,
            "agent_infected": agent_infected,
        }
        if self._terminated or self._truncated:
            self.duration = world.t - 1 if agent_infected else world.t
            info["duration"] = self.duration
        return StepOutcome(obs, float(reward), self._terminated,
                           self._truncated, info)

    def _require_reset(self) -> None:
        if self.world is None:
            raise RuntimeError("environment not initialized; call reset() first")
