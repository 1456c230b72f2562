"""Random-bit dynamics against explicit enumeration."""
from fractions import Fraction

import numpy as np
import pytest

from specinfer import (DomainError, ExplicitPA, approximation_gap,
                       make_gridworld, to_explicit, transition_counts,
                       transition_prob, world_from_json)
from conftest import random_pa

DELTAS = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}


def explicit_gridworld(world, slip_prob):
    """Reference transition matrix from the per-cell movement rules."""
    states = tuple(world.cell_id(x, y)
                   for y in range(world.height) for x in range(world.width))
    position = {s: k for k, s in enumerate(states)}
    acts = world.pa.action_ids()
    probs = np.zeros((len(states), len(acts), len(states)))

    def land(x, y, direction):
        dx, dy = DELTAS[direction]
        nx, ny = x + dx, y + dy
        if not (0 <= nx < world.width and 0 <= ny < world.height):
            nx, ny = x, y
        return position[world.cell_id(nx, ny)]

    for row, state in enumerate(states):
        x, y = world.cell_of(state)
        for k, name in enumerate(world.actions):
            probs[row, k, land(x, y, world.slip_dir)] += slip_prob
            probs[row, k, land(x, y, name)] += 1 - slip_prob
    return ExplicitPA(probs, world.pa.initial_state, states)


class TestTransitionProb:
    def test_two_action_world_interior(self):
        # Right/down world with downward slip, 3 coin bits: 1/8 slip.
        w = make_gridworld(4, 4, 1, 3, slip_dir="down",
                           actions=("right", "down"))
        s = w.cell_id(1, 1)
        right = w.action_id("right")
        assert transition_prob(w.pa, s, right, w.cell_id(2, 1)) == Fraction(7, 8)
        assert transition_prob(w.pa, s, right, w.cell_id(1, 2)) == Fraction(1, 8)

    def test_rows_sum_to_one_exactly(self, rng):
        for _ in range(25):
            pa = random_pa(rng)
            for s in range(pa.n_states):
                for a in pa.action_ids():
                    total = sum(transition_prob(pa, s, a, s2)
                                for s2 in range(pa.n_states))
                    assert total == 1

    def test_invalid_action_rejected(self):
        w = make_gridworld(2, 2, 0, 0, actions=("right", "down", "left"))
        with pytest.raises(DomainError):
            transition_prob(w.pa, 0, 3, 0)

    def test_determinism_single_successor_per_coin(self, rng):
        for _ in range(10):
            pa = random_pa(rng)
            for s in range(pa.n_states):
                for a in pa.action_ids():
                    counts = transition_counts(pa, s, a)
                    assert sum(counts.values()) == 1 << pa.n_coin_bits


class TestApproximationGap:
    def test_exact_dyadic_world(self):
        w = make_gridworld(4, 2, 1, 5)
        assert approximation_gap(w.pa, explicit_gridworld(w, 1 / 32)) == 0.0

    def test_exact_against_own_explicit_view(self):
        w = make_gridworld(2, 2, 1, 2)
        assert approximation_gap(w.pa, to_explicit(w.pa)) == 0.0

    def test_one_third_slip_rounds_to_eleven_thirtyseconds(self):
        # Oracle: nearest dyadic with q=5 is 11/32; worst deviation 1/96.
        w = make_gridworld(2, 2, 11, 5)
        gap = approximation_gap(w.pa, explicit_gridworld(w, 1 / 3))
        assert gap == pytest.approx(1 / 96, rel=1e-9)


class TestGridworld:
    def test_experiment_scale_bit_counts(self):
        w = make_gridworld(8, 8, 1, 5)
        assert w.pa.n_coin_bits == 5
        assert w.pa.n_state_bits == 6
        assert w.pa.n_action_bits == 2

    def test_zero_slip_is_deterministic(self):
        w = make_gridworld(3, 3, 0, 2)
        for s in range(w.n_cells):
            for a in w.pa.action_ids():
                assert all(p in (0, 1) for p in
                           (transition_prob(w.pa, s, a, t)
                            for t in range(w.pa.n_states)))

    def test_two_cell_fifty_fifty(self):
        # Slip left cancels a right move half the time on a 2x1 strip.
        w = make_gridworld(2, 1, 1, 1, slip_dir="left")
        p = transition_prob(w.pa, w.cell_id(0, 0), w.action_id("right"),
                            w.cell_id(1, 0))
        assert p == Fraction(1, 2)

    def test_boundary_moves_stay_put(self):
        w = make_gridworld(4, 4, 0, 0)
        for x in range(4):
            assert transition_prob(w.pa, w.cell_id(x, 0), w.action_id("up"),
                                   w.cell_id(x, 0)) == 1
            assert transition_prob(w.pa, w.cell_id(x, 3), w.action_id("down"),
                                   w.cell_id(x, 3)) == 1
        for y in range(4):
            assert transition_prob(w.pa, w.cell_id(0, y), w.action_id("left"),
                                   w.cell_id(0, y)) == 1
            assert transition_prob(w.pa, w.cell_id(3, y), w.action_id("right"),
                                   w.cell_id(3, y)) == 1

    def test_matches_reference_rules_everywhere(self):
        w = make_gridworld(5, 3, 3, 4, slip_dir="down")
        assert approximation_gap(w.pa, explicit_gridworld(w, 3 / 16)) == 0.0

    def test_rejects_bad_slip(self):
        with pytest.raises(DomainError):
            make_gridworld(2, 2, 5, 2)

    def test_tile_predicates(self):
        w = make_gridworld(2, 2, 0, 0, tiles=["yr", "wb"])
        assert w.cells_of_color("yellow") == [(0, 0)]
        assert w.cells_of_color("red") == [(1, 0)]
        assert w.cells_of_color("blue") == [(1, 1)]

    def test_json_roundtrip(self):
        w = make_gridworld(3, 2, 1, 2, tiles=["ywr", "bnw"], start=(2, 1),
                           slip_dir="down", actions=("right", "down"))
        w2 = world_from_json(w.to_json())
        assert w2.rows == w.rows
        assert w2.start == w.start
        assert w2.pa.initial_state == w.pa.initial_state
        assert to_explicit(w2.pa).probs.tolist() == \
            to_explicit(w.pa).probs.tolist()
