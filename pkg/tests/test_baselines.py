"""Baseline policies: fixed behaviors and the greedy brute-force oracle."""

import numpy as np
import pytest

from contagionrl.baselines import (CANDIDATE_MOVES, ReplayPolicy, greedy_action,
                                   make_policy, random_action,
                                   stationary_action)
from contagionrl.epidemic import Compartment, WorldState
from contagionrl.errors import ConfigError
from contagionrl.geometry import toroidal_distance, wrap_position

S, I, R, D = Compartment.S, Compartment.I, Compartment.R, Compartment.D


def world_with(positions, compartments, g=50, agent=(25.0, 25.0)):
    return WorldState(
        grid_size=g,
        positions=np.asarray(positions, dtype=float).reshape(-1, 2),
        compartments=np.asarray(compartments, dtype=np.int8),
        agent_pos=np.asarray(agent, dtype=float),
        agent_adherence=0.0,
    )


def greedy_oracle(world, movement_scale=1.0):
    """Independent 9-way argmax with the same declared tie-breaks."""
    infected = [i for i in range(world.n_humans)
                if world.compartments[i] == I]
    if not infected:
        return np.array([0.0, 0.0, 1.0])
    best_i, best_d = None, None
    for i in infected:  # lowest id wins distance ties
        d = float(toroidal_distance(world.agent_pos, world.positions[i],
                                    world.grid_size))
        if best_d is None or d < best_d:
            best_i, best_d = i, d
    target = world.positions[best_i]
    best_move, best_sep = None, None
    for move in CANDIDATE_MOVES:  # first candidate wins separation ties
        hypothetical = wrap_position(world.agent_pos + movement_scale * move,
                                     world.grid_size)
        sep = float(toroidal_distance(hypothetical, target, world.grid_size))
        if best_sep is None or sep > best_sep:
            best_move, best_sep = move, sep
    return np.array([best_move[0] * movement_scale,
                     best_move[1] * movement_scale, 1.0])


class TestStationary:
    def test_always_zero(self):
        for _ in range(5):
            assert np.array_equal(stationary_action(), [0.0, 0.0, 0.0])


class TestRandom:
    def test_bounds_and_means(self):
        rng = np.random.default_rng(0)
        draws = np.array([random_action(rng) for _ in range(100_000)])
        assert np.all(draws[:, 0] >= -1) and np.all(draws[:, 0] <= 1)
        assert np.all(draws[:, 1] >= -1) and np.all(draws[:, 1] <= 1)
        assert np.all(draws[:, 2] >= 0) and np.all(draws[:, 2] <= 1)
        assert -0.02 < draws[:, 0].mean() < 0.02
        assert -0.02 < draws[:, 1].mean() < 0.02
        assert 0.48 < draws[:, 2].mean() < 0.52


class TestGreedy:
    def test_no_infected_defaults_stationary_full_adherence(self):
        world = world_with([(1, 1), (2, 2)], [S, R])
        assert np.array_equal(greedy_action(world), [0.0, 0.0, 1.0])

    def test_flees_due_west_from_eastern_threat(self):
        world = world_with([(28, 25)], [I])
        assert np.array_equal(greedy_action(world), [-1.0, 0.0, 1.0])

    def test_targets_nearer_threat(self):
        world = world_with([(25, 27), (25, 5)], [I, I])
        action = greedy_action(world)
        # Fleeing the north threat means moving south.
        assert action[1] == -1.0 and action[2] == 1.0

    def test_separation_never_decreases(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            n = int(rng.integers(1, 12))
            world = world_with(rng.uniform(0, 50, (n, 2)),
                               rng.choice([S, I, R, D], size=n),
                               agent=rng.uniform(0, 50, 2))
            infected = np.flatnonzero(world.compartments == I)
            if infected.size == 0:
                continue
            dists = toroidal_distance(world.agent_pos,
                                      world.positions[infected], 50)
            target = world.positions[infected[np.argmin(dists)]]
            before = float(np.min(dists))
            action = greedy_action(world)
            after = float(toroidal_distance(
                wrap_position(world.agent_pos + action[:2], 50), target, 50))
            assert after >= before - 1e-12

    def test_agent_colocated_with_threat_breaks_tie_east(self):
        # All eight compass moves give the same separation; the fixed
        # candidate order picks east.
        world = world_with([(25, 25)], [I])
        assert np.array_equal(greedy_action(world), [1.0, 0.0, 1.0])

    def test_nearest_tie_goes_to_lowest_id(self):
        world = world_with([(25, 28), (25, 22)], [I, I])
        action = greedy_action(world)
        oracle = greedy_oracle(world_with([(25, 28), (25, 22)], [I, I]))
        assert np.array_equal(action, oracle)
        assert action[1] == -1.0  # flees the id-0 (northern) threat

    def test_movement_scale_scales_candidates(self):
        world = world_with([(28, 25)], [I])
        action = greedy_action(world, movement_scale=0.5)
        assert np.array_equal(action, [-0.5, 0.0, 1.0])

    def test_oracle_equivalence_10k_random_worlds(self):
        rng = np.random.default_rng(2)
        for _ in range(10_000):
            n = int(rng.integers(0, 10))
            g = float(rng.choice([10, 25, 50]))
            world = world_with(np.round(rng.uniform(0, g, (n, 2)), 3) % g,
                               rng.choice([S, I, R, D], size=n), g=g,
                               agent=rng.uniform(0, g, 2))
            got = greedy_action(world)
            want = greedy_oracle(world)
            assert np.array_equal(got, want)


class TestPolicyFactory:
    def test_names(self):
        world = world_with([(28, 25)], [I])
        assert np.array_equal(make_policy("stationary")(world), [0, 0, 0])
        assert np.array_equal(make_policy("greedy")(world), [-1.0, 0.0, 1.0])
        rng = np.random.default_rng(0)
        action = make_policy("random", rng=rng)(world)
        assert action.shape == (3,)

    def test_random_requires_rng(self):
        with pytest.raises(ConfigError):
            make_policy("random")

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="unknown policy"):
            make_policy("clever")

    def test_replay_policy(self, tmp_path):
        path = tmp_path / "actions.jsonl"
        path.write_text("[0.1, 0.2, 0.3]\n[0.4, 0.5, 0.6]\n")
        policy = make_policy(f"replay:{path}")
        world = world_with([(28, 25)], [I])
        assert np.allclose(policy(world), [0.1, 0.2, 0.3])
        assert np.allclose(policy(world), [0.4, 0.5, 0.6])
        with pytest.raises(StopIteration):
            policy(world)

    def test_replay_policy_class(self):
        policy = ReplayPolicy([[0, 0, 1]])
        assert np.array_equal(policy(None), [0, 0, 1])
