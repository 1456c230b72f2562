"""Task specifications as deterministic sequential monitor circuits.

A monitor carries history bits, one update circuit per history bit, and an
acceptance predicate over the final history and state.  The initial state is
observed before the first action (with action bits zeroed), then each step
feeds the action taken and the post-transition state through the update
circuits; a trace satisfies the specification iff `accept` holds at the end.

Builders for the usual past-time operators (once, historically, since) each
cost one history bit, and monitors compose under and/or/not by running their
history bits side by side.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import circuits as c
from .errors import DomainError


@dataclass(frozen=True)
class Monitor:
    n_state_bits: int
    n_action_bits: int
    n_history_bits: int
    initial_history: int
    update: tuple[c.BitExpr, ...]
    accept: c.BitExpr

    def __post_init__(self):
        if len(self.update) != self.n_history_bits:
            raise DomainError("need one update circuit per history bit")
        if self.initial_history >= (1 << max(self.n_history_bits, 1)):
            raise DomainError("initial history does not fit the history bits")

    def _step(self, h: int, a: int, s: int) -> int:
        env = {("h", i): (h >> i) & 1 for i in range(self.n_history_bits)}
        env.update({("a", i): (a >> i) & 1 for i in range(self.n_action_bits)})
        env.update({("s", i): (s >> i) & 1 for i in range(self.n_state_bits)})
        out = 0
        for i, expr in enumerate(self.update):
            out |= c.evaluate(expr, env) << i
        return out

    def initial(self, s0: int) -> int:
        """History after observing the start state (action bits zeroed)."""
        return self._step(self.initial_history, 0, s0)

    def is_accepting(self, h: int, s: int) -> bool:
        env = {("h", i): (h >> i) & 1 for i in range(self.n_history_bits)}
        env.update({("s", i): (s >> i) & 1 for i in range(self.n_state_bits)})
        return bool(c.evaluate(self.accept, env))


def accepts(m: Monitor, trace, s0: int) -> bool:
    """Run the monitor over a sequence of (action, state) pairs."""
    if s0 >= (1 << max(m.n_state_bits, 1)):
        raise DomainError(f"state {s0} does not fit {m.n_state_bits} bits")
    h = m.initial(s0)
    s = s0
    for a, s_next in trace:
        if a >= (1 << max(m.n_action_bits, 1)) or a < 0:
            raise DomainError(f"action {a} does not fit {m.n_action_bits} bits")
        if s_next >= (1 << max(m.n_state_bits, 1)) or s_next < 0:
            raise DomainError(
                f"state {s_next} does not fit {m.n_state_bits} bits")
        s = s_next
        h = m._step(h, a, s)
    return m.is_accepting(h, s)


def _check_alphabet(m1: Monitor, m2: Monitor):
    if (m1.n_state_bits, m1.n_action_bits) != (m2.n_state_bits, m2.n_action_bits):
        raise DomainError("monitors read different state/action alphabets")


def _shift_history(expr: c.BitExpr, offset: int) -> c.BitExpr:
    mapping = {}
    for name in c.inputs_of(expr):
        if name[0] == "h":
            mapping[name] = ("h", name[1] + offset)
    return c.rename(expr, mapping) if mapping else expr


def _product(m1: Monitor, m2: Monitor, combine) -> Monitor:
    _check_alphabet(m1, m2)
    off = m1.n_history_bits
    update = m1.update + tuple(_shift_history(u, off) for u in m2.update)
    return Monitor(
        n_state_bits=m1.n_state_bits,
        n_action_bits=m1.n_action_bits,
        n_history_bits=off + m2.n_history_bits,
        initial_history=m1.initial_history | (m2.initial_history << off),
        update=update,
        accept=combine(m1.accept, _shift_history(m2.accept, off)),
    )


def m_and(m1: Monitor, m2: Monitor) -> Monitor:
    return _product(m1, m2, c.And)


def m_or(m1: Monitor, m2: Monitor) -> Monitor:
    return _product(m1, m2, c.Or)


def m_not(m: Monitor) -> Monitor:
    return Monitor(m.n_state_bits, m.n_action_bits, m.n_history_bits,
                   m.initial_history, m.update, c.Not(m.accept))


# -- builders ----------------------------------------------------------------


def true_monitor(n_state_bits: int, n_action_bits: int) -> Monitor:
    return Monitor(n_state_bits, n_action_bits, 0, 0, (), c.TRUE)


def false_monitor(n_state_bits: int, n_action_bits: int) -> Monitor:
    return Monitor(n_state_bits, n_action_bits, 0, 0, (), c.FALSE)


def once(pred: c.BitExpr, n_state_bits: int, n_action_bits: int) -> Monitor:
    """Latches as soon as `pred` holds at any observed state."""
    h = c.Input(("h", 0))
    return Monitor(n_state_bits, n_action_bits, 1, 0,
                   (c.Or(h, pred),), h)


def historically(pred: c.BitExpr, n_state_bits: int,
                 n_action_bits: int) -> Monitor:
    """Holds iff `pred` held at every observed state."""
    h = c.Input(("h", 0))
    return Monitor(n_state_bits, n_action_bits, 1, 1,
                   (c.And(h, pred),), h)


def since(pred: c.BitExpr, trigger: c.BitExpr, n_state_bits: int,
          n_action_bits: int) -> Monitor:
    """Holds iff `trigger` fired at some point and `pred` held ever since."""
    h = c.Input(("h", 0))
    return Monitor(n_state_bits, n_action_bits, 1, 0,
                   (c.Or(trigger, c.And(pred, h)),), h)


def reach(world, color: str) -> Monitor:
    return once(world.tile_predicate(color), world.pa.n_state_bits,
                world.pa.n_action_bits)


def avoid(world, color: str) -> Monitor:
    return historically(c.Not(world.tile_predicate(color)),
                        world.pa.n_state_bits, world.pa.n_action_bits)


def dry_before_recharge(world, wet_color="blue", dry_color="brown",
                        goal_color="yellow") -> Monitor:
    """After stepping in `wet_color`, require `dry_color` before `goal_color`.

    Two history bits: bit 0 tracks "wet" (stepped in water, not yet dried),
    bit 1 latches a violation (entered the goal while still wet).  Wetness is
    read before its own update, so a tile cannot cure and recharge at once.
    """
    wet_in = c.Input(("h", 0))
    bad_in = c.Input(("h", 1))
    is_wet_tile = world.tile_predicate(wet_color)
    is_dry_tile = world.tile_predicate(dry_color)
    is_goal_tile = world.tile_predicate(goal_color)
    wet_next = c.And(c.Not(is_dry_tile), c.Or(is_wet_tile, wet_in))
    bad_next = c.Or(bad_in, c.And(is_goal_tile, wet_in))
    return Monitor(world.pa.n_state_bits, world.pa.n_action_bits, 2, 0,
                   (wet_next, bad_next), c.Not(bad_in))


# -- combinator expressions ----------------------------------------------


_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*|\(|\)|,)")

_COLORS = ("yellow", "red", "blue", "brown", "white")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise DomainError(
                    f"bad character in expression at {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _parse(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise DomainError("unexpected end of expression")
    head = tokens[pos]
    if head in ("(", ")", ","):
        raise DomainError(f"unexpected {head!r} in expression")
    pos += 1
    if pos < len(tokens) and tokens[pos] == "(":
        pos += 1
        args = []
        if pos >= len(tokens):
            raise DomainError("unbalanced parentheses in expression")
        if tokens[pos] == ")":
            return (head, args), pos + 1
        while True:
            arg, pos = _parse(tokens, pos)
            args.append(arg)
            if pos >= len(tokens):
                raise DomainError("unbalanced parentheses in expression")
            if tokens[pos] == ",":
                pos += 1
                continue
            if tokens[pos] == ")":
                return (head, args), pos + 1
            raise DomainError(f"expected ',' or ')' near {tokens[pos]!r}")
    return (head, None), pos


def _color_pred(node, world):
    head, args = node
    if args is not None or head not in _COLORS:
        raise DomainError(f"expected a tile color, got {head!r}")
    return world.tile_predicate(head)


def _build(node, world) -> Monitor:
    head, args = node
    n_s, n_a = world.pa.n_state_bits, world.pa.n_action_bits
    if args is None:
        if head == "true":
            return true_monitor(n_s, n_a)
        if head == "false":
            return false_monitor(n_s, n_a)
        raise DomainError(f"unknown specification atom {head!r}")
    if head == "and" or head == "or":
        if len(args) < 2:
            raise DomainError(f"{head}(...) needs at least two operands")
        ms = [_build(a, world) for a in args]
        out = ms[0]
        for m in ms[1:]:
            out = m_and(out, m) if head == "and" else m_or(out, m)
        return out
    if head == "not":
        if len(args) != 1:
            raise DomainError("not(...) takes exactly one operand")
        return m_not(_build(args[0], world))
    if head in ("reach", "once"):
        if len(args) != 1:
            raise DomainError(f"{head}(...) takes exactly one color")
        return once(_color_pred(args[0], world), n_s, n_a)
    if head == "avoid":
        if len(args) != 1:
            raise DomainError("avoid(...) takes exactly one color")
        return historically(c.Not(_color_pred(args[0], world)), n_s, n_a)
    if head == "historically":
        if len(args) != 1:
            raise DomainError("historically(...) takes exactly one color")
        return historically(_color_pred(args[0], world), n_s, n_a)
    if head == "since":
        if len(args) != 2:
            raise DomainError("since(...) takes exactly two colors")
        return since(_color_pred(args[0], world),
                     _color_pred(args[1], world), n_s, n_a)
    if head == "dry_before_recharge":
        if len(args) != 3:
            raise DomainError("dry_before_recharge(...) takes three colors")
        colors = []
        for a in args:
            if a[1] is not None or a[0] not in _COLORS:
                raise DomainError(f"expected a tile color, got {a[0]!r}")
            colors.append(a[0])
        return dry_before_recharge(world, *colors)
    raise DomainError(f"unknown specification operator {head!r}")


def _referenced_colors(node, out):
    head, args = node
    if args is None:
        if head in _COLORS:
            out.add(head)
        return
    for a in args:
        _referenced_colors(a, out)


def parse_spec(text: str, world) -> Monitor:
    """Build a monitor from a combinator expression over tile colors.

    Example: ``and(reach(yellow), avoid(red))``.  Every referenced color
    must appear somewhere on the grid.
    """
    tokens = _tokenize(text)
    node, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise DomainError(f"trailing tokens in expression: {tokens[pos:]}")
    colors: set[str] = set()
    _referenced_colors(node, colors)
    for color in sorted(colors):
        if not world.cells_of_color(color):
            raise DomainError(
                f"expression references color {color!r} absent from the world")
    return _build(node, world)
