"""Unroll dynamics + monitor over a finite horizon into one decision diagram.

The resulting diagram reads, per time step, the action bits then the coin
bits (most significant bit first within each block, steps in time order) and
evaluates to 1 iff the decoded trace satisfies the monitor, to 0 iff it does
not, and to BOT iff some step's action bits decode to no real action.

Construction runs backward from the acceptance predicate: symbolic history
and state variables (kept above the trace bits so substitutions resolve
early) are replaced, round by round, with the previous step's transition and
update circuits, so the full depth-tau tree is never materialized.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import cached_property

from . import circuits as c
from .bdd import ONE, Engine
from .dynamics import RandomBitPA
from .errors import DomainError
from .monitor import Monitor

ROLE_ACTION = "action"
ROLE_COIN = "coin"


@dataclass(frozen=True)
class LevelMeta:
    """Level layout of a trace diagram: time-major, action bits first."""

    tau: int
    n_action_bits: int
    n_coin_bits: int

    @property
    def step_width(self) -> int:
        return self.n_action_bits + self.n_coin_bits

    @property
    def n_levels(self) -> int:
        return self.tau * self.step_width

    def action_level(self, t: int, bit: int) -> int:
        """Level testing little-endian action bit `bit` of step `t`."""
        return t * self.step_width + (self.n_action_bits - 1 - bit)

    def coin_level(self, t: int, bit: int) -> int:
        return (t * self.step_width + self.n_action_bits
                + (self.n_coin_bits - 1 - bit))

    def role_at(self, level: int):
        """(role, step, little-endian bit index) of a level."""
        t, off = divmod(level, self.step_width)
        if off < self.n_action_bits:
            return ROLE_ACTION, t, self.n_action_bits - 1 - off
        return ROLE_COIN, t, self.n_coin_bits - 1 - (off - self.n_action_bits)

    @cached_property
    def action_prefix(self) -> tuple[int, ...]:
        """prefix[i] = number of action-bit levels strictly below level i."""
        prefix = [0]
        for level in range(self.n_levels):
            is_action = level % self.step_width < self.n_action_bits
            prefix.append(prefix[-1] + (1 if is_action else 0))
        return tuple(prefix)

    def level_names(self) -> list[str]:
        names = []
        for level in range(self.n_levels):
            role, t, bit = self.role_at(level)
            names.append(f"{'a' if role == ROLE_ACTION else 'c'}{bit}@t{t}")
        return names

    def encode_step(self, t: int, action: int, coin: int, bits: list[int]):
        """Write one step's action/coin bits into a level-indexed buffer."""
        for i in range(self.n_action_bits):
            bits[self.action_level(t, i)] = (action >> i) & 1
        for j in range(self.n_coin_bits):
            bits[self.coin_level(t, j)] = (coin >> j) & 1


@dataclass
class CompileStats:
    internal_nodes: int
    total_nodes: int
    n_levels: int
    seconds: float
    node_bound: int

    def to_record(self) -> dict:
        return {
            "internal_nodes": self.internal_nodes,
            "total_nodes": self.total_nodes,
            "levels": self.n_levels,
            "seconds": self.seconds,
            "node_bound": self.node_bound,
        }


@dataclass
class TraceBdd:
    """A compiled horizon-tau composition of dynamics and monitor.

    Trace level i of `meta` lives at engine level `offset + i`; the lower
    engine levels held the symbolic history/state variables during
    construction and are absent from the finished diagram.
    """

    engine: Engine
    root: int
    meta: LevelMeta
    pa: RandomBitPA
    monitor: Monitor
    stats: CompileStats
    offset: int = 0

    def trace_level(self, node: int) -> int:
        """Trace-space level of a node; terminals map to meta.n_levels."""
        return self.engine.level(node) - self.offset

    def evaluate(self, trace_bits):
        """0/1/None verdict for a full assignment of the trace levels."""
        if len(trace_bits) != self.meta.n_levels:
            raise DomainError(
                f"expected {self.meta.n_levels} trace bits, got {len(trace_bits)}")
        padded = [0] * self.offset + list(trace_bits)
        return self.engine.evaluate(self.root, padded)

    def to_dot(self) -> str:
        names = [f"v{i}" for i in range(self.offset)] + self.meta.level_names()
        return self.engine.to_dot(self.root, names)


def size_bound(pa: RandomBitPA, m: Monitor, tau: int) -> int:
    """A priori cap on the internal node count of the unrolled diagram.

    Inputs per step times the description size of one (coins, action, state,
    history) module; valid-action pruning shrinks the action factor.
    """
    n_actions = len(pa.action_ids())
    per_level = ((1 << pa.n_coin_bits) * n_actions
                 * (1 << pa.n_state_bits) * (1 << m.n_history_bits))
    return tau * (pa.n_action_bits + pa.n_coin_bits) * per_level


def unroll(pa: RandomBitPA, m: Monitor, tau: int,
           max_nodes: int | None = None) -> TraceBdd:
    """Compile the horizon-tau composition into a single trace diagram."""
    if tau < 1:
        raise DomainError("horizon must be at least 1")
    if pa.sink_bit is not None and m.n_state_bits == pa.n_state_bits - 1:
        m = widen_monitor(m, 1)  # monitors predate the appended sink flag
    if (m.n_state_bits, m.n_action_bits) != (pa.n_state_bits, pa.n_action_bits):
        raise DomainError("monitor alphabet does not match the dynamics")
    started = time.perf_counter()

    meta = LevelMeta(tau, pa.n_action_bits, pa.n_coin_bits)
    n_trace = meta.n_levels
    # Symbolic history/state variables sit above every trace bit so each
    # substitution round resolves them first.
    h_base = 0
    s_base = m.n_history_bits
    offset = m.n_history_bits + pa.n_state_bits
    engine = Engine(offset + n_trace, max_nodes=max_nodes)

    updates = m.update
    if pa.sink_bit is not None:
        # Once the episode-end flag is set, history freezes with the state.
        flag = c.Input(("s", pa.sink_bit))
        updates = tuple(c.Ite(flag, c.Input(("h", i)), u)
                        for i, u in enumerate(updates))

    h_vars = {("h", i): engine.var(h_base + i)
              for i in range(m.n_history_bits)}
    s_vars = {("s", i): engine.var(s_base + i)
              for i in range(pa.n_state_bits)}

    acc = c.to_bdd(m.accept, engine, {**h_vars, **s_vars})
    engine.clear_caches()

    for t in reversed(range(tau)):
        step_vars = {("a", i): engine.var(offset + meta.action_level(t, i))
                     for i in range(pa.n_action_bits)}
        step_vars.update({("c", j): engine.var(offset + meta.coin_level(t, j))
                          for j in range(pa.n_coin_bits)})
        trans_binding = {**s_vars, **step_vars}
        s_next = [c.to_bdd(expr, engine, trans_binding)
                  for expr in pa.next_state]
        update_binding = {**h_vars, **step_vars}
        update_binding.update({("s", i): s_next[i]
                               for i in range(pa.n_state_bits)})
        h_next = [c.to_bdd(expr, engine, update_binding) for expr in updates]
        subst = {s_base + i: s_next[i] for i in range(pa.n_state_bits)}
        subst.update({h_base + i: h_next[i] for i in range(m.n_history_bits)})
        acc = engine.compose(acc, subst)
        engine.clear_caches()

    # Plug in the start state and the history after observing it.
    h0 = m.initial(pa.initial_state)
    subst0 = {h_base + i: engine.const((h0 >> i) & 1)
              for i in range(m.n_history_bits)}
    subst0.update({s_base + i: engine.const((pa.initial_state >> i) & 1)
                   for i in range(pa.n_state_bits)})
    root = engine.compose(acc, subst0)
    engine.clear_caches()

    # Send invalid action encodings to BOT, one validity factor per step.
    if not (isinstance(pa.valid_action, c.Const) and pa.valid_action.value):
        all_valid = ONE
        for t in range(tau):
            binding = {("a", i): engine.var(offset + meta.action_level(t, i))
                       for i in range(pa.n_action_bits)}
            all_valid = engine.apply(
                "and", all_valid, c.to_bdd(pa.valid_action, engine, binding))
        if all_valid != ONE:
            root = engine.apply("gate", all_valid, root)
        engine.clear_caches()

    seconds = time.perf_counter() - started
    stats = CompileStats(
        internal_nodes=engine.size(root),
        total_nodes=engine.total_size(root),
        n_levels=n_trace,
        seconds=seconds,
        node_bound=size_bound(pa, m, tau),
    )
    return TraceBdd(engine, root, meta, pa, m, stats, offset=offset)


def with_discount(pa: RandomBitPA, gamma_num: int, n_gamma_bits: int,
                  eps: float) -> tuple[RandomBitPA, int]:
    """Geometric episode termination via a latched sink flag.

    Appends one state bit (the sink flag) and `n_gamma_bits` coin bits per
    step; each step ends the episode with probability
    gamma_num / 2**n_gamma_bits, freezing the state (and, at compile time,
    the monitor history).  Returns the modified dynamics and the horizon
    needed for the episode to have ended with probability at least 1 - eps.
    """
    if pa.sink_bit is not None:
        raise DomainError("dynamics already carry a sink flag")
    if not 0 < gamma_num <= (1 << n_gamma_bits):
        raise DomainError("termination probability must be dyadic in (0, 1]")
    if not 0 < eps < 1:
        raise DomainError("eps must be in (0, 1)")
    gamma = gamma_num / (1 << n_gamma_bits)

    flag = c.Input(("s", pa.n_state_bits))
    gamma_bits = [c.Input(("c", pa.n_coin_bits + j))
                  for j in range(n_gamma_bits)]
    ends_now = c.uint_lt_const(gamma_bits, gamma_num)
    stop = c.Or(flag, ends_now)
    next_state = tuple(c.Ite(stop, c.Input(("s", i)), expr)
                       for i, expr in enumerate(pa.next_state))
    next_state = next_state + (stop,)

    discounted = RandomBitPA(
        n_state_bits=pa.n_state_bits + 1,
        n_action_bits=pa.n_action_bits,
        n_coin_bits=pa.n_coin_bits + n_gamma_bits,
        initial_state=pa.initial_state,
        next_state=next_state,
        valid_action=pa.valid_action,
        sink_bit=pa.n_state_bits,
    )
    if gamma == 1.0:
        tau = 1
    else:
        tau = max(1, math.ceil(math.log(eps) / math.log1p(-gamma)))
    return discounted, tau


def widen_monitor(m: Monitor, extra_state_bits: int) -> Monitor:
    """Re-target a monitor at dynamics whose state grew by trailing bits."""
    if extra_state_bits < 0:
        raise DomainError("cannot shrink the state alphabet")
    return Monitor(m.n_state_bits + extra_state_bits, m.n_action_bits,
                   m.n_history_bits, m.initial_history, m.update, m.accept)
