"""Movement models for the non-learning humans.

Two kinds:

* ``continuous_random`` -- per-axis Gaussian step, clamped to the action
  bounds and scaled.  The sigma of 0.3 is an implementation choice, not
  dictated by the model description: clamping is a negligible truncation
  (>99.9% of the mass lies inside the bounds), and at this diffusion
  speed the stationary and random reference policies come out
  statistically indistinguishable, matching the expected baseline
  ordering.
* ``workplace_home_cycle`` -- deterministic commute between a home
  anchor (the human's initial position) and a work anchor, targeting
  work during the first half of each cycle and home during the second.
  Period and anchor selection are likewise declared stand-ins, all
  config-overridable.

Dead humans never move; the environment zeroes their displacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .config import SimConfig
from .epidemic import Compartment, WorldState, _sample_position

RANDOM_MOVE_SIGMA = 0.3


@dataclass
class MovementModel:
    kind: str
    movement_scale: float
    cycle_period: int = 64
    home_anchors: np.ndarray | None = None  # (N, 2); cycle model only
    work_anchors: np.ndarray | None = None  # (N, 2); cycle model only


def build_movement_model(config: SimConfig, world: WorldState,
                         rng: np.random.Generator) -> MovementModel:
    """Construct the movement model for a fresh episode.

    For the cycle model, home anchors are the humans' initial positions.
    Work anchors are sampled uniformly at least ``safe_distance`` from
    the agent start: one shared anchor by default, or one per human with
    ``work_anchor_mode=per_human``.
    """
    if config.movement_type != "workplace_home_cycle":
        return MovementModel(kind=config.movement_type,
                             movement_scale=config.movement_scale)
    n = world.n_humans
    constraints = [([world.agent_pos], config.safe_distance)]
    if config.work_anchor_mode == "shared":
        shared = _sample_position(rng, world.grid_size, constraints, "work anchor")
        work = np.tile(shared, (n, 1))
        world.work_anchor = shared
    else:
        work = np.zeros((n, 2))
        for i in range(n):
            work[i] = _sample_position(rng, world.grid_size, constraints,
                                       f"work anchor {i}")
    return MovementModel(
        kind=config.movement_type,
        movement_scale=config.movement_scale,
        cycle_period=config.cycle_period,
        home_anchors=world.positions.copy(),
        work_anchors=work,
    )


def sample_random_move(rng: np.random.Generator, movement_scale: float) -> np.ndarray:
    """One human's stochastic step: clamped Gaussian per axis, scaled."""
    return sample_random_moves(rng, 1, movement_scale)[0]


def sample_random_moves(rng: np.random.Generator, n: int,
                        movement_scale: float) -> np.ndarray:
    """(n, 2) block of stochastic steps; |component| <= movement_scale."""
    draws = rng.normal(0.0, RANDOM_MOVE_SIGMA, size=(n, 2))
    return np.clip(draws, -1.0, 1.0) * movement_scale


def cycle_move(pos: np.ndarray, home: np.ndarray, work: np.ndarray, t: int,
               cycle_period: int, movement_scale: float,
               grid_size: float) -> np.ndarray:
    """One human's commute step at (1-based) step ``t``.

    Moves toward the current target anchor along the wrapped shortest
    path, by at most ``movement_scale`` in Euclidean length; lands
    exactly on the anchor when within reach.
    """
    return cycle_moves(pos[None, :], home[None, :], work[None, :], t,
                       cycle_period, movement_scale, grid_size)[0]


def cycle_moves(positions: np.ndarray, home: np.ndarray, work: np.ndarray,
                t: int, cycle_period: int, movement_scale: float,
                grid_size: float) -> np.ndarray:
    """(n, 2) block of commute steps toward the phase's target anchor."""
    phase = (t - 1) % cycle_period
    targets = work if phase < cycle_period / 2 else home
    delta = geometry.wrapped_delta(positions, targets, grid_size)
    length = np.linalg.norm(delta, axis=-1, keepdims=True)
    safe_length = np.where(length == 0, 1.0, length)
    return np.where(length > movement_scale,
                    delta * (movement_scale / safe_length), delta)


def move_humans(world: WorldState, model: MovementModel,
                rng: np.random.Generator) -> None:
    """Advance all living humans one movement step, wrapping positions.

    Displacements are drawn for every human (fixed RNG layout) and then
    zeroed for the dead.
    """
    n = world.n_humans
    if n == 0:
        return
    if model.kind == "continuous_random":
        disp = sample_random_moves(rng, n, model.movement_scale)
    else:
        disp = cycle_moves(world.positions, model.home_anchors,
                           model.work_anchors, world.t, model.cycle_period,
                           model.movement_scale, world.grid_size)
    disp[world.compartments == Compartment.D] = 0.0
    world.positions = geometry.wrap_position(world.positions + disp,
                                             world.grid_size)
