"""Stochastic gridworlds as deterministic circuits over fair coins.

Transition probabilities become counts of matching coin strings over 2**q,
so they stay exact rationals until the planner needs floats.
"""
from fractions import Fraction

import numpy as np

from specinfer import (ExplicitPA, approximation_gap, infer_coins,
                       make_gridworld, to_explicit, transition_prob)

# Four actions; with probability 1/32 the agent slips left instead.
world = make_gridworld(8, 8, slip_num=1, n_slip_bits=5, start=(4, 7))
pa = world.pa
print("state bits:", pa.n_state_bits, " action bits:", pa.n_action_bits,
      " coin bits:", pa.n_coin_bits)

s = world.cell_id(4, 4)
right = world.action_id("right")
print("P(moved right)  =", transition_prob(pa, s, right, world.cell_id(5, 4)))
print("P(slipped left) =", transition_prob(pa, s, right, world.cell_id(3, 4)))

# every transition probability is backed by concrete coin witnesses
coins = infer_coins(pa, s, right, world.cell_id(3, 4))
print("coins that slip:", coins, "->", Fraction(len(coins), 2 ** 5))

# moves off the edge leave the agent in place
edge = world.cell_id(0, 0)
print("P(stay at the corner moving up) =",
      transition_prob(pa, edge, world.action_id("up"), edge))

# rows of the dense view sum to one exactly
explicit = to_explicit(pa)
print("dense matrix shape:", explicit.probs.shape,
      " max row-sum error:", abs(explicit.probs.sum(axis=2) - 1).max())

# a 1/3 slip probability is not dyadic: q=5 coins can do no better than
# 11/32, and approximation_gap quantifies the residual error
DELTAS = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}


def one_third_reference(w):
    probs = np.zeros((w.n_cells, 4, w.n_cells))
    for y in range(w.height):
        for x in range(w.width):
            row = y * w.width + x
            for k, name in enumerate(w.actions):
                for direction, p in ((w.slip_dir, 1 / 3), (name, 2 / 3)):
                    dx, dy = DELTAS[direction]
                    nx = min(max(x + dx, 0), w.width - 1)
                    ny = min(max(y + dy, 0), w.height - 1)
                    probs[row, k, ny * w.width + nx] += p
    states = tuple(w.cell_id(x, y)
                   for y in range(w.height) for x in range(w.width))
    return ExplicitPA(probs, w.pa.initial_state, states)


approx = make_gridworld(4, 4, slip_num=11, n_slip_bits=5)
gap = approximation_gap(approx.pa, one_third_reference(approx))
print("gap against a true-1/3 table:", gap)
print("|1/3 - 11/32| =", float(abs(Fraction(1, 3) - Fraction(11, 32))))
