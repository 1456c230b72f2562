"""Probabilistic automata in the random-bit model.

Stochastic transitions are a deterministic function of the current state,
the chosen action, and q fair coin flips, all encoded as little-endian bit
vectors and computed by per-bit Boolean circuits.  Probabilities therefore
stay exact dyadic rationals (count of matching coin strings over 2**q) until
the planner converts them to floats.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import circuits as c
from .errors import DomainError

ACTION_NAMES = ("up", "down", "left", "right")
_DELTAS = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}
COLOR_CHARS = {
    "yellow": "y", "red": "r", "blue": "b", "brown": "n", "white": "w",
}


@dataclass(frozen=True)
class RandomBitPA:
    """Dynamics as one Boolean circuit per next-state bit.

    Circuit inputs are named ("s", i) for state bits, ("a", i) for action
    bits and ("c", i) for coin bits.  `valid_action` is true exactly on the
    encodings of real actions.  `sink_bit`, when set, names the state bit
    that latches episode termination (see `compiler.with_discount`).
    """

    n_state_bits: int
    n_action_bits: int
    n_coin_bits: int
    initial_state: int
    next_state: tuple[c.BitExpr, ...]
    valid_action: c.BitExpr = c.TRUE
    sink_bit: int | None = None

    def __post_init__(self):
        if len(self.next_state) != self.n_state_bits:
            raise DomainError("need one next-state circuit per state bit")
        if self.initial_state >= (1 << self.n_state_bits):
            raise DomainError("initial state does not fit the state bits")

    @property
    def n_states(self) -> int:
        return 1 << self.n_state_bits

    def action_ids(self) -> tuple[int, ...]:
        """Encodings accepted by valid_action, in numeric order."""
        return tuple(a for a in range(1 << self.n_action_bits)
                     if c.evaluate(self.valid_action, _env("a", a, self.n_action_bits)))

    def is_valid_action(self, a: int) -> bool:
        if not 0 <= a < (1 << self.n_action_bits):
            return False
        return bool(c.evaluate(self.valid_action, _env("a", a, self.n_action_bits)))

    def step(self, s: int, a: int, coin: int) -> int:
        """The successor state for one concrete coin outcome."""
        env = _env("s", s, self.n_state_bits)
        env.update(_env("a", a, self.n_action_bits))
        env.update(_env("c", coin, self.n_coin_bits))
        out = 0
        for i, expr in enumerate(self.next_state):
            out |= c.evaluate(expr, env) << i
        return out


def _env(kind: str, value: int, width: int) -> dict:
    return {(kind, i): (value >> i) & 1 for i in range(width)}


def transition_counts(pa: RandomBitPA, s: int, a: int) -> dict[int, int]:
    """Successor -> number of coin strings reaching it (sums to 2**q)."""
    if not 0 <= s < pa.n_states:
        raise DomainError(f"state {s} out of range")
    if not pa.is_valid_action(a):
        raise DomainError(f"invalid action encoding {a}")
    counts: dict[int, int] = {}
    for coin in range(1 << pa.n_coin_bits):
        s2 = pa.step(s, a, coin)
        counts[s2] = counts.get(s2, 0) + 1
    return counts


def transition_prob(pa: RandomBitPA, s: int, a: int, s2: int) -> Fraction:
    """Exact probability of s -> s2 under action a."""
    counts = transition_counts(pa, s, a)
    return Fraction(counts.get(s2, 0), 1 << pa.n_coin_bits)


@dataclass
class ExplicitPA:
    """Dense transition-matrix view, used as a reference in tests.

    `states` lists the state encodings the matrix rows/columns refer to;
    bit patterns outside the list (padding encodings for non-power-of-two
    state spaces) take no part in comparisons.
    """

    probs: np.ndarray  # shape (len(states), n_actions, len(states))
    initial_state: int
    states: tuple[int, ...] | None = None

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.ndim != 3 or self.probs.shape[0] != self.probs.shape[2]:
            raise DomainError("transition matrix must be (S, A, S)")
        if self.states is None:
            self.states = tuple(range(self.probs.shape[0]))
        elif len(self.states) != self.probs.shape[0]:
            raise DomainError("need one matrix row per listed state")
        rows = self.probs.sum(axis=2)
        if not np.allclose(rows, 1.0, atol=1e-12):
            raise DomainError("each (state, action) row must sum to 1")

    @property
    def n_states(self):
        return self.probs.shape[0]

    @property
    def n_actions(self):
        return self.probs.shape[1]


def to_explicit(pa: RandomBitPA) -> ExplicitPA:
    """Enumerate every coin string into a dense matrix over all bit-states."""
    n, q = pa.n_states, pa.n_coin_bits
    actions = pa.action_ids()
    probs = np.zeros((n, len(actions), n))
    for s in range(n):
        for k, a in enumerate(actions):
            for s2, count in transition_counts(pa, s, a).items():
                probs[s, k, s2] = count / (1 << q)
    return ExplicitPA(probs, pa.initial_state)


def approximation_gap(pa: RandomBitPA, ref: ExplicitPA) -> float:
    """Worst-case |reference probability - achieved dyadic probability|.

    Probability mass the dynamics send to encodings outside the reference's
    state list counts in full as deviation.
    """
    actions = pa.action_ids()
    if ref.n_states > pa.n_states or ref.n_actions != len(actions):
        raise DomainError("state/action sets do not match")
    if any(s >= pa.n_states for s in ref.states):
        raise DomainError("reference lists states the dynamics cannot encode")
    position = {s: k for k, s in enumerate(ref.states)}
    denom = 1 << pa.n_coin_bits
    worst = 0.0
    for row, s in enumerate(ref.states):
        for k, a in enumerate(actions):
            counts = transition_counts(pa, s, a)
            for s2, count in counts.items():
                want = ref.probs[row, k, position[s2]] \
                    if s2 in position else 0.0
                worst = max(worst, abs(count / denom - want))
            for col, s2 in enumerate(ref.states):
                if s2 not in counts:
                    worst = max(worst, abs(ref.probs[row, k, col]))
    return worst


# -- gridworld ---------------------------------------------------------------


@dataclass(frozen=True)
class Gridworld:
    """A colored grid with slip dynamics and its random-bit encoding.

    Coordinates are (x, y) with x growing rightward and y growing downward;
    `rows[y][x]` is the tile color character (y/r/b/n/w).  Each step the
    agent slips toward `slip_dir` when the coin value falls below
    `slip_num`, and otherwise moves as intended; either move is dropped
    (the agent stays put) when it would leave the grid.
    """

    width: int
    height: int
    rows: tuple[str, ...]
    start: tuple[int, int]
    slip_num: int
    n_slip_bits: int
    slip_dir: str
    actions: tuple[str, ...]
    pa: RandomBitPA

    @property
    def n_x_bits(self):
        return _bits_for(self.width)

    @property
    def n_y_bits(self):
        return _bits_for(self.height)

    @property
    def n_cells(self):
        return self.width * self.height

    def cell_id(self, x: int, y: int) -> int:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise DomainError(f"cell ({x}, {y}) outside the grid")
        return x | (y << self.n_x_bits)

    def cell_of(self, state: int) -> tuple[int, int]:
        return state & ((1 << self.n_x_bits) - 1), state >> self.n_x_bits

    def color_at(self, x: int, y: int) -> str:
        return self.rows[y][x]

    def cells_of_color(self, color: str) -> list[tuple[int, int]]:
        ch = COLOR_CHARS.get(color, color)
        return [(x, y) for y in range(self.height) for x in range(self.width)
                if self.rows[y][x] == ch]

    def tile_predicate(self, color: str) -> c.BitExpr:
        """State-bit circuit that is true on tiles of the given color."""
        ch = COLOR_CHARS.get(color, color)
        if ch not in COLOR_CHARS.values():
            raise DomainError(f"unknown tile color {color!r}")
        sbits = [c.Input(("s", i)) for i in range(self.pa.n_state_bits)]
        return c.any_of(
            c.eq_const(sbits, self.cell_id(x, y))
            for x, y in self.cells_of_color(ch))

    def action_id(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise DomainError(f"unknown action {name!r}") from None

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "tiles": list(self.rows),
            "start": list(self.start),
            "slip": {"num": self.slip_num, "q": self.n_slip_bits,
                     "dir": self.slip_dir},
            "actions": list(self.actions),
        }


def _bits_for(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 0


def _increment(bits, limit):
    """x+1 clamped at `limit`; little-endian ripple carry."""
    carry = c.TRUE
    out = []
    for b in bits:
        out.append(c.Xor(b, carry))
        carry = c.And(carry, b)
    at_limit = c.eq_const(bits, limit)
    return [c.Ite(at_limit, b, o) for b, o in zip(bits, out)]


def _decrement(bits):
    """x-1 clamped at 0; little-endian ripple borrow."""
    borrow = c.TRUE
    out = []
    for b in bits:
        out.append(c.Xor(b, borrow))
        borrow = c.And(borrow, c.Not(b))
    at_zero = c.eq_const(bits, 0)
    return [c.Ite(at_zero, b, o) for b, o in zip(bits, out)]


def make_gridworld(width, height, slip_num, n_slip_bits, tiles=None,
                   start=(0, 0), slip_dir="left",
                   actions=ACTION_NAMES) -> Gridworld:
    """Build a gridworld and its random-bit dynamics.

    The slip probability is slip_num / 2**n_slip_bits, so only dyadic slip
    probabilities are representable; pick n_slip_bits to taste and measure
    the residual with `approximation_gap` if the target is not dyadic.
    Slip coin values occupy the contiguous prefix [0, slip_num).
    """
    if width < 1 or height < 1:
        raise DomainError("grid must be at least 1x1")
    if not 0 <= slip_num <= (1 << n_slip_bits):
        raise DomainError("slip numerator must fit in the slip coin bits")
    if slip_dir not in _DELTAS:
        raise DomainError(f"unknown slip direction {slip_dir!r}")
    actions = tuple(actions)
    for name in actions:
        if name not in _DELTAS:
            raise DomainError(f"unknown action {name!r}")
    if tiles is None:
        tiles = ["w" * width] * height
    rows = tuple(tiles)
    if len(rows) != height or any(len(r) != width for r in rows):
        raise DomainError("tile map must be `height` rows of `width` chars")
    for r in rows:
        for ch in r:
            if ch not in COLOR_CHARS.values():
                raise DomainError(f"unknown tile character {ch!r}")

    n_x = _bits_for(width)
    n_y = _bits_for(height)
    n_s = n_x + n_y
    n_a = _bits_for(len(actions)) if len(actions) > 1 else 1

    xbits = [c.Input(("s", i)) for i in range(n_x)]
    ybits = [c.Input(("s", n_x + i)) for i in range(n_y)]
    abits = [c.Input(("a", i)) for i in range(n_a)]
    cbits = [c.Input(("c", i)) for i in range(n_slip_bits)]

    slip = c.uint_lt_const(cbits, slip_num)

    def selected(direction):
        intended = c.any_of(c.eq_const(abits, k)
                            for k, name in enumerate(actions)
                            if name == direction)
        return c.Ite(slip, c.Const(slip_dir == direction), intended)

    x_inc = _increment(xbits, width - 1)
    x_dec = _decrement(xbits)
    y_inc = _increment(ybits, height - 1)
    y_dec = _decrement(ybits)
    go_left, go_right = selected("left"), selected("right")
    go_up, go_down = selected("up"), selected("down")

    next_bits = []
    for i in range(n_x):
        next_bits.append(
            c.Ite(go_left, x_dec[i], c.Ite(go_right, x_inc[i], xbits[i])))
    for i in range(n_y):
        next_bits.append(
            c.Ite(go_up, y_dec[i], c.Ite(go_down, y_inc[i], ybits[i])))

    n_codes = 1 << n_a
    valid = c.TRUE if len(actions) == n_codes \
        else c.uint_lt_const(abits, len(actions))

    sx, sy = start
    if not (0 <= sx < width and 0 <= sy < height):
        raise DomainError("start cell outside the grid")
    pa = RandomBitPA(
        n_state_bits=n_s,
        n_action_bits=n_a,
        n_coin_bits=n_slip_bits,
        initial_state=sx | (sy << n_x),
        next_state=tuple(next_bits),
        valid_action=valid,
    )
    return Gridworld(width, height, rows, (sx, sy), slip_num, n_slip_bits,
                     slip_dir, actions, pa)


def world_from_json(data: dict) -> Gridworld:
    try:
        slip = data.get("slip", {})
        return make_gridworld(
            width=data["width"],
            height=data["height"],
            slip_num=slip.get("num", 0),
            n_slip_bits=slip.get("q", 0),
            tiles=data["tiles"],
            start=tuple(data.get("start", (0, 0))),
            slip_dir=slip.get("dir", "left"),
            actions=tuple(data.get("actions", ACTION_NAMES)),
        )
    except KeyError as e:
        raise DomainError(f"world file is missing field {e.args[0]!r}") from None


def load_world(path) -> Gridworld:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise DomainError(f"world file {path}: {e}") from None
    return world_from_json(data)
