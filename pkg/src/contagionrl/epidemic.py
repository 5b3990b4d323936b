"""SIRS+D compartment dynamics for the population and the agent.

State transitions are synchronous: every draw in a step uses the
compartment vector frozen at the start of that step, so outcomes do not
depend on iteration order.  Within the infected branch, death is drawn
before recovery; an individual cannot do both in one step.

RNG discipline: callers pass dedicated ``numpy.random.Generator``
streams (placement vs transitions), so adding unrelated draws elsewhere
never perturbs trajectories.  Per step the transition stream consumes a
fixed layout: one (n_humans, 4) uniform block for the humans, then the
agent's own draw(s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import geometry
from .config import SimConfig
from .errors import PlacementError

PLACEMENT_MAX_ATTEMPTS = 10_000


class Compartment(IntEnum):
    S = 0
    I = 1
    R = 2
    D = 3


@dataclass
class EpidemicParams:
    """Disease and placement parameters used by the transition kernel."""

    beta: float
    distance_decay: float
    recovery_rate: float
    immunity_loss_prob: float
    lethality_rate: float
    max_infection_distance: float  # -1 means unlimited
    reinfection_count: int
    safe_distance: float
    initial_agent_distance: float
    initial_infected: int

    @classmethod
    def from_config(cls, config: SimConfig) -> "EpidemicParams":
        return cls(
            beta=config.infection_rate,
            distance_decay=config.distance_decay,
            recovery_rate=config.recovery_rate,
            immunity_loss_prob=config.immunity_loss_prob,
            lethality_rate=config.lethality_rate,
            max_infection_distance=config.max_infection_distance,
            reinfection_count=config.reinfection_count,
            safe_distance=config.safe_distance,
            initial_agent_distance=config.initial_agent_distance,
            initial_infected=config.initial_infected,
        )


@dataclass
class WorldState:
    """Mutable snapshot of one episode's world.

    ``positions`` is (N, 2) float64 with coordinates in [0, grid_size);
    ``compartments`` is (N,) int8.  Dead individuals never move or
    change compartment.
    """

    grid_size: int
    positions: np.ndarray
    compartments: np.ndarray
    agent_pos: np.ndarray
    agent_adherence: float
    agent_compartment: Compartment = Compartment.S
    t: int = 0
    work_anchor: np.ndarray | None = None
    home_anchors: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_humans(self) -> int:
        return len(self.compartments)

    def counts(self) -> dict:
        """Compartment counts over the human population (agent excluded)."""
        return {
            c.name: int(np.count_nonzero(self.compartments == c))
            for c in Compartment
        }

    def copy(self) -> "WorldState":
        return WorldState(
            grid_size=self.grid_size,
            positions=self.positions.copy(),
            compartments=self.compartments.copy(),
            agent_pos=self.agent_pos.copy(),
            agent_adherence=self.agent_adherence,
            agent_compartment=self.agent_compartment,
            t=self.t,
            work_anchor=None if self.work_anchor is None else self.work_anchor.copy(),
            home_anchors=None if self.home_anchors is None else self.home_anchors.copy(),
        )


def exposure(pos: np.ndarray, infected_positions: np.ndarray,
             distance_decay: float, max_infection_distance: float,
             grid_size: float) -> float:
    """Summed distance-decayed exposure at ``pos`` from infected individuals.

    Each infected at toroidal distance d contributes exp(-k_d * d) when
    d <= max_infection_distance; beyond the cutoff the contribution is
    exactly 0.  A cutoff of -1 sums over all infected.
    """
    infected_positions = np.asarray(infected_positions, dtype=float)
    if infected_positions.size == 0:
        return 0.0
    d = geometry.toroidal_distance(pos, infected_positions, grid_size)
    if max_infection_distance != -1:
        d = d[d <= max_infection_distance]
        if d.size == 0:
            return 0.0
    return float(np.sum(np.exp(-distance_decay * d)))


def infection_probability(exposure_value: float, beta_eff: float) -> float:
    """P(infection) = 1 - exp(-beta_eff * exposure).

    Mathematically in [0, 1); in floats the value saturates to exactly
    1.0 once the exponent argument passes ~36.
    """
    return 1.0 - math.exp(-beta_eff * exposure_value)


@dataclass
class TransitionReport:
    """What happened during one synchronous transition pass."""

    agent_infection_probability: float
    new_infections: int  # human S->I events this pass (reinfection excluded)


def step_compartments(world: WorldState, params: EpidemicParams,
                      rng: np.random.Generator,
                      agent_beta_eff: float | None = None) -> TransitionReport:
    """Advance every individual's compartment by one synchronous step.

    Humans draw against the raw base rate ``params.beta``; the agent
    draws against ``agent_beta_eff`` (adherence-modulated; defaults to
    the raw rate).  Exposure is computed from the infected *humans*
    frozen at entry -- the agent never contributes to spread, because an
    episode ends the moment it becomes infected.
    """
    comps = world.compartments
    n = world.n_humans
    infected_mask = comps == Compartment.I
    infected_positions = world.positions[infected_mask]

    # Fixed-layout uniforms: columns = (infection, death, recovery, immunity loss).
    draws = rng.random((n, 4)) if n else np.empty((0, 4))

    new_comps = comps.copy()
    new_infections = 0

    susceptible = np.flatnonzero(comps == Compartment.S)
    if susceptible.size and infected_positions.size:
        delta = geometry.wrapped_delta(world.positions[susceptible][:, None, :],
                                       infected_positions[None, :, :],
                                       world.grid_size)
        dists = np.linalg.norm(delta, axis=-1)
        contrib = np.exp(-params.distance_decay * dists)
        if params.max_infection_distance != -1:
            contrib[dists > params.max_infection_distance] = 0.0
        p_inf = 1.0 - np.exp(-params.beta * contrib.sum(axis=1))
        newly = susceptible[draws[susceptible, 0] < p_inf]
        new_comps[newly] = Compartment.I
        new_infections = int(newly.size)

    infected = np.flatnonzero(infected_mask)
    died = infected[draws[infected, 1] < params.lethality_rate]
    new_comps[died] = Compartment.D
    alive = infected[draws[infected, 1] >= params.lethality_rate]
    recovered = alive[draws[alive, 2] < params.recovery_rate]
    new_comps[recovered] = Compartment.R

    recovered_now = np.flatnonzero(comps == Compartment.R)
    lost = recovered_now[draws[recovered_now, 3] < params.immunity_loss_prob]
    new_comps[lost] = Compartment.S

    # Agent transition, same frozen snapshot, dedicated scalar draw.
    if agent_beta_eff is None:
        agent_beta_eff = params.beta
    agent_p_inf = 0.0
    agent_draw = rng.random()
    if world.agent_compartment == Compartment.S:
        agent_p_inf = infection_probability(
            exposure(world.agent_pos, infected_positions,
                     params.distance_decay, params.max_infection_distance,
                     world.grid_size),
            agent_beta_eff,
        )
        if agent_draw < agent_p_inf:
            world.agent_compartment = Compartment.I
    elif world.agent_compartment == Compartment.I:
        if agent_draw < params.lethality_rate:
            world.agent_compartment = Compartment.D
        elif rng.random() < params.recovery_rate:
            world.agent_compartment = Compartment.R
    elif world.agent_compartment == Compartment.R:
        if agent_draw < params.immunity_loss_prob:
            world.agent_compartment = Compartment.S

    world.compartments = new_comps
    return TransitionReport(agent_infection_probability=float(agent_p_inf),
                            new_infections=new_infections)


def reinfect_if_extinct(world: WorldState, params: EpidemicParams,
                        rng: np.random.Generator) -> bool:
    """Force reinfection when no infected humans remain.

    Selects ``reinfection_count`` susceptible humans at least
    ``safe_distance`` from the agent, uniformly without replacement.
    Returns False (leaving the world untouched) when too few eligible
    susceptibles exist, which terminates the episode.
    """
    if np.any(world.compartments == Compartment.I):
        return True
    eligible = np.flatnonzero(
        (world.compartments == Compartment.S)
        & (geometry.toroidal_distance(world.agent_pos, world.positions,
                                      world.grid_size) >= params.safe_distance)
    )
    if len(eligible) < params.reinfection_count:
        return False
    chosen = rng.choice(eligible, size=params.reinfection_count, replace=False)
    world.compartments[chosen] = Compartment.I
    return True


def _sample_position(rng: np.random.Generator, grid_size: float,
                     constraints: list, what: str) -> np.ndarray:
    """Rejection-sample a uniform position satisfying distance constraints.

    ``constraints`` holds (anchor_positions, min_distance) pairs.  A hard
    cap on attempts turns infeasible configs into an explicit error
    instead of silently relaxing the constraints.
    """
    for _ in range(PLACEMENT_MAX_ATTEMPTS):
        pos = rng.uniform(0.0, grid_size, size=2)
        ok = True
        for anchors, min_dist in constraints:
            if min_dist <= 0 or len(anchors) == 0:
                continue
            d = geometry.toroidal_distance(pos, np.asarray(anchors), grid_size)
            if np.min(d) < min_dist:
                ok = False
                break
        if ok:
            return pos
    raise PlacementError(
        f"could not place {what} after {PLACEMENT_MAX_ATTEMPTS} attempts; "
        "placement constraints are infeasible for this configuration"
    )


def initialize(config: SimConfig, rng: np.random.Generator) -> WorldState:
    """Create the initial world for one episode.

    The agent starts susceptible at the grid center with the configured
    adherence.  Humans are placed uniformly at random, all at least
    ``initial_agent_distance`` from the agent; the initially infected
    ones (ids 0..initial_infected-1) additionally keep ``safe_distance``
    from the agent and from each other.
    """
    g = float(config.grid_size)
    agent_pos = np.array([g / 2.0, g / 2.0])
    positions = np.zeros((config.n_humans, 2))
    compartments = np.full(config.n_humans, Compartment.S, dtype=np.int8)

    infected_min_agent = max(config.initial_agent_distance, config.safe_distance)
    placed_infected: list[np.ndarray] = []
    for i in range(config.initial_infected):
        pos = _sample_position(
            rng, g,
            [([agent_pos], infected_min_agent),
             (placed_infected, config.safe_distance)],
            what=f"infected individual {i}",
        )
        positions[i] = pos
        placed_infected.append(pos)
        compartments[i] = Compartment.I

    for i in range(config.initial_infected, config.n_humans):
        positions[i] = _sample_position(
            rng, g,
            [([agent_pos], config.initial_agent_distance)],
            what=f"individual {i}",
        )

    return WorldState(
        grid_size=config.grid_size,
        positions=positions,
        compartments=compartments,
        agent_pos=agent_pos,
        agent_adherence=float(config.initial_agent_adherence),
    )
