"""Non-learning baseline policies: stationary, random, greedy.

A policy is a callable ``policy(world) -> action`` producing the
``(dx, dy, alpha)`` triple.  The greedy policy reads true compartments
from the world (privileged information by design); the random policy
draws from the stream it was constructed with and ignores the world.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import geometry
from .epidemic import Compartment, WorldState
from .errors import ConfigError

_DIAG = 1.0 / math.sqrt(2.0)

# Tie-break is positional: first candidate in this fixed order wins.
CANDIDATE_MOVES = np.array([
    (0.0, 0.0),
    (1.0, 0.0),    # E
    (-1.0, 0.0),   # W
    (0.0, 1.0),    # N
    (0.0, -1.0),   # S
    (_DIAG, _DIAG),    # NE
    (-_DIAG, _DIAG),   # NW
    (_DIAG, -_DIAG),   # SE
    (-_DIAG, -_DIAG),  # SW
])


def stationary_action() -> np.ndarray:
    """Zero movement, zero adherence, every step."""
    return np.zeros(3)


def random_action(rng: np.random.Generator) -> np.ndarray:
    """Uniform movement in [-1, 1]^2 and adherence in [0, 1]."""
    return np.array([rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                     rng.uniform(0.0, 1.0)])


def greedy_action(world: WorldState, movement_scale: float = 1.0) -> np.ndarray:
    """Move to maximize distance from the nearest infected human; alpha 1.

    Evaluates staying put plus the eight compass directions at step size
    ``movement_scale``, scoring each candidate's hypothetical wrapped
    position against the threat's current position.  Nearest-threat ties
    go to the lowest human id; move ties to the earliest candidate.
    With no infected humans the move defaults to (0, 0).
    """
    infected = np.flatnonzero(world.compartments == Compartment.I)
    if infected.size == 0:
        return np.array([0.0, 0.0, 1.0])
    dists = geometry.toroidal_distance(world.agent_pos,
                                       world.positions[infected],
                                       world.grid_size)
    target = world.positions[infected[int(np.argmin(dists))]]
    candidates = geometry.wrap_position(
        world.agent_pos + movement_scale * CANDIDATE_MOVES, world.grid_size)
    separations = geometry.toroidal_distance(candidates, target, world.grid_size)
    best = CANDIDATE_MOVES[int(np.argmax(separations))] * movement_scale
    return np.array([best[0], best[1], 1.0])


class ReplayPolicy:
    """Replays a recorded action sequence; raises StopIteration when spent."""

    def __init__(self, actions):
        self._actions = [np.asarray(a, dtype=float).reshape(3) for a in actions]
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str) -> "ReplayPolicy":
        """Load actions from a file of one JSON array [dx, dy, alpha] per line."""
        actions = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                actions.append(json.loads(line))
        return cls(actions)

    def __call__(self, world: WorldState) -> np.ndarray:
        if self._cursor >= len(self._actions):
            raise StopIteration("replay actions exhausted")
        action = self._actions[self._cursor]
        self._cursor += 1
        return action


def make_policy(name: str, rng: np.random.Generator | None = None,
                movement_scale: float = 1.0):
    """Build a policy callable from its CLI name.

    Accepts ``stationary``, ``random``, ``greedy``, or
    ``replay:<actions-file>``.
    """
    if name == "stationary":
        return lambda world: stationary_action()
    if name == "random":
        if rng is None:
            raise ConfigError("random policy requires an RNG stream")
        return lambda world: random_action(rng)
    if name == "greedy":
        return lambda world: greedy_action(world, movement_scale)
    if name.startswith("replay:"):
        return ReplayPolicy.from_file(name.split(":", 1)[1])
    raise ConfigError(
        f"unknown policy {name!r}; expected stationary, random, greedy, "
        "or replay:<actions-file>"
    )
