"""Soft-Bellman value backup executed directly on the trace diagram.

Decision (action-bit) levels take a two-way softmax of their children,
chance (coin-bit) levels an average, and terminals carry the scaled binary
trace reward.  Reduction-eliminated decision levels are recovered on the fly:
an edge that jumps over k action-bit levels contributes its child's value
plus k*ln(2), while skipped coin levels contribute nothing.  Edges into BOT
(invalid action encodings) are excluded and the surviving branch is
renormalized, which conditions the policy on picking real actions.

The induced stochastic policy satisfies the task with a probability that
grows monotonically with the rationality coefficient, so a target
satisfaction probability is fit by doubling then bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bdd import BOT, ONE, ZERO
from .compiler import ROLE_ACTION, TraceBdd
from .errors import DomainError, StructureError

LN2 = math.log(2.0)


def _logaddexp(a: float, b: float) -> float:
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@dataclass
class ValueTable:
    """Per-node soft values (nats) at a fixed rationality coefficient."""

    theta: float
    rewards: tuple[float, float]
    values: dict[int, float]
    root_value: float


@dataclass
class PolicySolution:
    theta: float
    table: ValueTable
    sat: float
    target: float
    converged: bool
    iterations: int = 0
    target_below_uniform: bool = False

    def to_record(self) -> dict:
        return {
            "theta": self.theta,
            "sat": self.sat,
            "target": self.target,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def value_backup(b: TraceBdd, theta: float,
                 rewards: tuple[float, float] = (0.0, 1.0)) -> ValueTable:
    """Single memoized pass computing the soft value of every reachable node.

    `rewards` maps the (rejected, accepted) terminals; the default binary
    co-domain gives V(ONE) = theta, V(ZERO) = 0.
    """
    if theta < 0:
        raise DomainError("rationality coefficient must be nonnegative")
    engine, meta, offset = b.engine, b.meta, b.offset
    prefix = meta.action_prefix
    n_levels = meta.n_levels
    values: dict[int, float] = {
        ZERO: theta * rewards[0],
        ONE: theta * rewards[1],
    }
    if b.root == BOT:
        raise StructureError("diagram has no valid assignment at all")

    def clamp(node) -> int:
        level = engine.level(node) - offset
        return n_levels if level > n_levels else level

    def value(u: int) -> float:
        got = values.get(u)
        if got is not None:
            return got
        lvl, lo, hi = engine.node(u)
        lvl -= offset
        role, _, _ = meta.role_at(lvl)

        def contribution(child):
            skipped = prefix[clamp(child)] - prefix[lvl + 1]
            return value(child) + skipped * LN2

        if lo == BOT and hi == BOT:
            raise StructureError("decision node with both branches invalid")
        if lo == BOT or hi == BOT:
            out = contribution(hi if lo == BOT else lo)
        elif role == ROLE_ACTION:
            out = _logaddexp(contribution(lo), contribution(hi))
        else:
            out = 0.5 * (contribution(lo) + contribution(hi))
        values[u] = out
        return out

    root_value = value(b.root) + prefix[clamp(b.root)] * LN2
    return ValueTable(theta, rewards, values, root_value)


def policy_at(b: TraceBdd, vt: ValueTable, node: int, branch: int) -> float:
    """Probability of taking `branch` (0 -> lo, 1 -> hi) at a decision node."""
    engine, meta = b.engine, b.meta
    if engine.is_terminal(node):
        raise DomainError("terminals make no decisions")
    lvl, lo, hi = engine.node(node)
    lvl -= b.offset
    role, _, _ = meta.role_at(lvl)
    if role != ROLE_ACTION:
        raise DomainError(f"level {lvl} is a chance level, not a decision")
    child = hi if branch else lo
    other = lo if branch else hi
    if child == BOT:
        return 0.0
    if other == BOT:
        return 1.0
    prefix = meta.action_prefix
    child_level = min(engine.level(child) - b.offset, meta.n_levels)
    skipped = prefix[child_level] - prefix[lvl + 1]
    return math.exp(vt.values[child] + skipped * LN2 - vt.values[node])


def sat_prob(b: TraceBdd, vt: ValueTable) -> float:
    """Probability the induced policy's trace satisfies the monitor."""
    engine, meta, offset = b.engine, b.meta, b.offset
    prefix = meta.action_prefix
    n_levels = meta.n_levels
    probs: dict[int, float] = {ZERO: 0.0, ONE: 1.0}
    if b.root == BOT:
        raise StructureError("diagram has no valid assignment at all")

    def prob(u: int) -> float:
        got = probs.get(u)
        if got is not None:
            return got
        lvl, lo, hi = engine.node(u)
        lvl -= offset
        role, _, _ = meta.role_at(lvl)
        if lo == BOT or hi == BOT:
            out = prob(hi if lo == BOT else lo)
        elif role == ROLE_ACTION:
            child_lo = min(engine.level(lo) - offset, n_levels)
            skipped = prefix[child_lo] - prefix[lvl + 1]
            p_lo = math.exp(vt.values[lo] + skipped * LN2 - vt.values[u])
            out = p_lo * prob(lo) + (1.0 - p_lo) * prob(hi)
        else:
            out = 0.5 * (prob(lo) + prob(hi))
        probs[u] = out
        return out

    return prob(b.root)


def fit_theta(b: TraceBdd, p_target: float, tol: float = 1e-4,
              theta_cap: float = float(2 ** 20),
              rewards: tuple[float, float] = (0.0, 1.0)) -> PolicySolution:
    """Bisect the rationality coefficient to hit a satisfaction probability.

    Doubles an upper bracket from 1 until it clears the target (or hits
    `theta_cap`, returning an unconverged solution), then bisects until the
    achieved probability is within `tol`.  Targets at or below the uniform
    policy's probability return theta = 0 with `target_below_uniform` set.
    """
    if not 0.0 <= p_target <= 1.0:
        raise DomainError("target probability must lie in [0, 1]")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if rewards[1] <= rewards[0]:
        raise DomainError("the accepted-trace reward must exceed the rejected")

    def solve(theta: float):
        vt = value_backup(b, theta, rewards)
        return vt, sat_prob(b, vt)

    iterations = 0
    vt0, p0 = solve(0.0)
    if p_target <= p0:
        return PolicySolution(0.0, vt0, p0, p_target,
                              converged=abs(p0 - p_target) <= tol,
                              iterations=iterations,
                              target_below_uniform=True)

    hi = 1.0
    vt_hi, p_hi = solve(hi)
    iterations += 1
    while p_hi < p_target and hi < theta_cap:
        hi = min(hi * 2.0, theta_cap)
        vt_hi, p_hi = solve(hi)
        iterations += 1
    if p_hi < p_target:
        return PolicySolution(hi, vt_hi, p_hi, p_target, converged=False,
                              iterations=iterations)

    lo = 0.0
    theta, vt, p = hi, vt_hi, p_hi
    while abs(p - p_target) > tol and iterations < 200:
        mid = 0.5 * (lo + hi)
        vt, p = solve(mid)
        theta = mid
        iterations += 1
        if p < p_target:
            lo = mid
        else:
            hi = mid
    return PolicySolution(theta, vt, p, p_target,
                          converged=abs(p - p_target) <= tol,
                          iterations=iterations)


@dataclass
class PolicyWalker:
    """Cursor that replays a concrete bit path and accumulates log policy.

    Levels the diagram skipped carry the uniform per-bit policy, so a
    skipped action bit contributes -ln(2) and skipped coin bits nothing.
    """

    b: TraceBdd
    vt: ValueTable
    node: int = field(init=False)
    pos: int = field(init=False, default=0)

    def __post_init__(self):
        self.node = self.b.root

    def clone(self) -> "PolicyWalker":
        other = PolicyWalker(self.b, self.vt)
        other.node = self.node
        other.pos = self.pos
        return other

    def _take_bit(self, bit: int, expect_action: bool) -> float:
        engine, meta = self.b.engine, self.b.meta
        role, _, _ = meta.role_at(self.pos)
        if (role == ROLE_ACTION) != expect_action:
            raise StructureError("walker out of phase with the level layout")
        logp = 0.0
        if engine.level(self.node) - self.b.offset == self.pos:
            if role == ROLE_ACTION:
                p = policy_at(self.b, self.vt, self.node, bit)
                if p <= 0.0:
                    raise DomainError(
                        "bit pattern decodes to an invalid action")
                logp = math.log(p)
            _, lo, hi = engine.node(self.node)
            self.node = hi if bit else lo
            if self.node == BOT:
                raise DomainError("bit pattern decodes to an invalid action")
        elif role == ROLE_ACTION:
            logp = -LN2
        self.pos += 1
        return logp

    def take_action(self, action: int) -> float:
        """Consume one step's action bits; returns log pi(action | prefix)."""
        meta = self.b.meta
        logp = 0.0
        for i in reversed(range(meta.n_action_bits)):
            logp += self._take_bit((action >> i) & 1, expect_action=True)
        return logp

    def take_coins(self, coin: int):
        """Consume one step's coin bits (no likelihood contribution)."""
        meta = self.b.meta
        for j in reversed(range(meta.n_coin_bits)):
            self._take_bit((coin >> j) & 1, expect_action=False)
