"""Reward functions, including the potential-field reward and its ablations.

Five kinds, selected by ``reward_function_type``:

* ``constant`` -- 1 while susceptible, else 0.
* ``reduce_infection`` -- (1 - p_inf)^2 while susceptible, else -5.
* ``combined`` -- 0.8 * (1 - p_inf)^2 + 0.1 while susceptible, else 0.
* ``max_nearest_distance`` -- normalized distance to the nearest
  susceptible or infected human, saturating at a cutoff.
* ``potential_field`` -- weighted sum of a health term, an adherence
  term, and a movement term scoring alignment of the agent's move with
  the net repulsive force from infected (and susceptible) humans.

Force sign convention: each human contributes along the wrapped
displacement from the human *to* the agent, so the net force pushes the
agent away from threats.

Normalization guards: the epsilon constants act as zero thresholds.  A
force or action vector with norm <= epsilon contributes a zero
direction / zero alignment; above the threshold vectors are normalized
exactly, so an action exactly along the force direction with matched
magnitude scores a full movement reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .epidemic import Compartment, WorldState
from .errors import ConfigError


@dataclass(frozen=True)
class PotentialFieldParams:
    w_health: float = 0.1
    w_adherence: float = 0.2
    w_movement: float = 0.7
    weight_infected: float = 1.0
    weight_susceptible: float = 0.5
    force_exponent: float = 1.0
    beta_magnitude: float = 0.25
    eps_dist: float = 1e-8
    eps_norm: float = 1e-8

    def __post_init__(self):
        total = self.w_health + self.w_adherence + self.w_movement
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-12):
            raise ConfigError(f"potential-field weights must sum to 1, got {total}")
        if self.eps_dist <= 0 or self.eps_norm <= 0:
            raise ConfigError("epsilon guards must be positive")


DEFAULT_PF_PARAMS = PotentialFieldParams()


def constant_reward(agent_compartment: Compartment) -> float:
    return 1.0 if agent_compartment == Compartment.S else 0.0


def reduce_infection_reward(p_inf: float, agent_compartment: Compartment) -> float:
    if agent_compartment == Compartment.S:
        return (1.0 - p_inf) ** 2
    return -5.0


def combined_reward(p_inf: float, agent_compartment: Compartment) -> float:
    if agent_compartment == Compartment.S:
        return 0.8 * (1.0 - p_inf) ** 2 + 0.1
    return 0.0


def max_nearest_distance_reward(d_min: float | None, distance_cutoff: float,
                                agent_compartment: Compartment) -> float:
    """Reward for keeping distance from the nearest S or I human.

    ``d_min`` is None when no relevant humans exist.  The cutoff is the
    max-infection-distance parameter; a nonpositive cutoff with relevant
    humans present leaves the formula undefined and is rejected.
    """
    if agent_compartment == Compartment.I:
        return 0.0
    if d_min is None:
        return 1.0
    if distance_cutoff <= 0:
        raise ConfigError(
            "max_nearest_distance reward requires max_infection_distance > 0 "
            f"when S/I humans are present, got {distance_cutoff}"
        )
    if d_min >= distance_cutoff:
        return 1.0
    return max(0.0, d_min / distance_cutoff)


def potential_force(agent_pos: np.ndarray, positions: np.ndarray,
                    compartments: np.ndarray, grid_size: float,
                    params: PotentialFieldParams = DEFAULT_PF_PARAMS,
                    ablation: str = "full") -> np.ndarray:
    """Net repulsive force on the agent from the human population.

    F = sum_j weight_j / (d_j^2 + eps_dist)^(p/2) * delta_j, with
    delta_j the wrapped displacement from human j to the agent.
    Infected humans weigh ``weight_infected``, susceptible ones
    ``weight_susceptible`` (zero under the no_susceptible_repulsion
    ablation); recovered and dead humans exert nothing.
    """
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        return np.zeros(2)
    weights = np.zeros(len(positions))
    weights[compartments == Compartment.I] = params.weight_infected
    if ablation != "no_susceptible_repulsion":
        weights[compartments == Compartment.S] = params.weight_susceptible
    delta = geometry.wrapped_delta(positions, agent_pos, grid_size)
    d_sq = np.sum(delta * delta, axis=-1) + params.eps_dist
    scale = weights / d_sq ** (params.force_exponent / 2.0)
    return scale @ delta


def _unit(vec: np.ndarray, eps: float) -> tuple[np.ndarray, float]:
    """Exact unit vector and norm; zero vector below the eps threshold."""
    norm = float(np.linalg.norm(vec))
    if norm <= eps:
        return np.zeros_like(vec), norm
    return vec / norm, norm


def potential_field_reward(force: np.ndarray, last_move: np.ndarray,
                           agent_compartment: Compartment, alpha: float,
                           params: PotentialFieldParams = DEFAULT_PF_PARAMS,
                           ablation: str = "full") -> float:
    """Composite reward: 0.1 * health + 0.2 * adherence + 0.7 * movement.

    The movement term blends directional alignment with the force and
    magnitude matching against min(|F|, 1); ablations zero out exactly
    one term each.
    """
    force_dir, force_norm = _unit(np.asarray(force, dtype=float), params.eps_norm)
    move = np.asarray(last_move, dtype=float)
    move_unit, move_norm = _unit(move, params.eps_norm)

    r_dir = float(np.clip(np.dot(move_unit, force_dir), -1.0, 1.0))
    r_mag = float(np.clip(1.0 - abs(move_norm - min(force_norm, 1.0)), -1.0, 1.0))

    if ablation == "no_magnitude":
        r_move = r_dir
    elif ablation == "no_direction":
        r_move = r_mag
    elif ablation == "no_movement":
        r_move = 0.0
    else:
        r_move = (1.0 - params.beta_magnitude) * r_dir + params.beta_magnitude * r_mag

    r_health = 0.0 if ablation == "no_health" else constant_reward(agent_compartment)
    r_adherence = 0.0 if ablation == "no_adherence" else alpha

    return (params.w_health * r_health + params.w_adherence * r_adherence
            + params.w_movement * r_move)


def nearest_relevant_distance(world: WorldState) -> float | None:
    """Agent's toroidal distance to the nearest S or I human, if any."""
    relevant = ((world.compartments == Compartment.S)
                | (world.compartments == Compartment.I))
    if not np.any(relevant):
        return None
    d = geometry.toroidal_distance(world.agent_pos, world.positions[relevant],
                                   world.grid_size)
    return float(np.min(d))


def compute_reward(kind: str, ablation: str, world: WorldState, p_inf: float,
                   last_move: np.ndarray, distance_cutoff: float,
                   params: PotentialFieldParams = DEFAULT_PF_PARAMS) -> float:
    """Dispatch on the configured reward kind, post-transition world."""
    comp = world.agent_compartment
    if kind == "constant":
        return constant_reward(comp)
    if kind == "reduce_infection":
        return reduce_infection_reward(p_inf, comp)
    if kind == "combined":
        return combined_reward(p_inf, comp)
    if kind == "max_nearest_distance":
        return max_nearest_distance_reward(nearest_relevant_distance(world),
                                           distance_cutoff, comp)
    if kind == "potential_field":
        force = potential_force(world.agent_pos, world.positions,
                                world.compartments, world.grid_size,
                                params, ablation)
        return potential_field_reward(force, last_move, comp,
                                      world.agent_adherence, params, ablation)
    raise ConfigError(f"unknown reward_function_type: {kind!r}")
