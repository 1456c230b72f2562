"""Hash-consed, reduced, ordered, three-terminal binary decision diagrams.

Nodes are plain integer handles into a per-engine store.  Handles 0, 1 and 2
are the terminals ZERO, ONE and BOT; BOT marks invalid bit assignments (e.g.
bit patterns that decode to no real action) and absorbs through every binary
operation.  Structural identity of handles doubles as semantic equality:
because `mk` eliminates redundant tests and merges isomorphic subgraphs, two
diagrams over the same engine compute the same function iff their handles are
equal.

Terminals sit at the sentinel level `n_vars`, one past every real variable,
so ordering checks need no special cases.  There are no complement edges and
no variable reordering; an engine owns a fixed variable count and a single
writer at a time.
"""
from __future__ import annotations

from .errors import DomainError, ResourceError, StructureError

ZERO = 0
ONE = 1
BOT = 2

_FIRST_NODE = 3

# op -> terminal handle for each (f_value, g_value) pair, indexed f*2 + g
OPS = {
    "and": (ZERO, ZERO, ZERO, ONE),
    "or": (ZERO, ONE, ONE, ONE),
    "xor": (ZERO, ONE, ONE, ZERO),
    "xnor": (ONE, ZERO, ZERO, ONE),
    "nand": (ONE, ONE, ONE, ZERO),
    "nor": (ONE, ZERO, ZERO, ZERO),
    "implies": (ONE, ONE, ZERO, ONE),
    "diff": (ZERO, ZERO, ONE, ZERO),
    # Validity gating: g where f holds, BOT elsewhere.
    "gate": (BOT, BOT, ZERO, ONE),
}

_IDEMPOTENT = frozenset(["and", "or"])


class Engine:
    """Node store plus the operations over it.

    One engine instance per compilation; instances are independent and may
    run on separate threads, but a single instance must not be mutated
    concurrently.
    """

    ZERO = ZERO
    ONE = ONE
    BOT = BOT

    def __init__(self, n_vars: int, max_nodes: int | None = None):
        if n_vars < 0:
            raise DomainError("variable count must be nonnegative")
        self.n_vars = n_vars
        self.terminal_level = n_vars
        self.max_nodes = max_nodes
        # handle -> (level, lo, hi); the first three slots are terminals
        self._nodes: list[tuple[int, int, int]] = \
            [(n_vars, -1, -1)] * _FIRST_NODE
        self._unique: dict[tuple[int, int, int], int] = {}
        self._apply_cache: dict[tuple, int] = {}
        self._ite_cache: dict[tuple, int] = {}

    # -- structure ---------------------------------------------------------

    def is_terminal(self, u: int) -> bool:
        return u < _FIRST_NODE

    def level(self, u: int) -> int:
        """Level of the tested variable; terminals sit at the sentinel."""
        return self._nodes[u][0]

    def node(self, u: int) -> tuple[int, int, int]:
        if u < _FIRST_NODE:
            raise StructureError(f"terminal {u} has no children")
        return self._nodes[u]

    def mk(self, level: int, lo: int, hi: int) -> int:
        """The unique reduced node testing `level` with children lo/hi."""
        if lo == hi:
            if not 0 <= level < self.n_vars or level >= self._nodes[lo][0]:
                raise StructureError(
                    f"level {level} out of order or out of range")
            return lo
        key = (level, lo, hi)
        got = self._unique.get(key)
        if got is not None:
            return got
        nodes = self._nodes
        if not 0 <= level < self.n_vars:
            raise StructureError(
                f"level {level} outside declared width {self.n_vars}")
        if level >= nodes[lo][0] or level >= nodes[hi][0]:
            raise StructureError(
                f"ordering violation: node at level {level} above children "
                f"at levels {nodes[lo][0]}, {nodes[hi][0]}")
        if self.max_nodes is not None and len(nodes) >= self.max_nodes:
            raise ResourceError(f"node budget {self.max_nodes} exhausted")
        handle = len(nodes)
        nodes.append(key)
        self._unique[key] = handle
        return handle

    def var(self, level: int) -> int:
        return self.mk(level, ZERO, ONE)

    def const(self, value) -> int:
        return ONE if value else ZERO

    # -- operations --------------------------------------------------------

    def apply(self, op: str, f: int, g: int) -> int:
        """Pointwise binary operation; BOT on either side absorbs."""
        try:
            table = OPS[op]
        except KeyError:
            raise DomainError(f"unknown operation {op!r}") from None
        return self._apply(op in _IDEMPOTENT, table, op, f, g)

    def _apply(self, idempotent, table, op, f, g):
        if f == BOT or g == BOT:
            return BOT
        if f < _FIRST_NODE and g < _FIRST_NODE:
            return table[f * 2 + g]
        if f == g and idempotent:
            return f
        key = (op, f, g)
        cache = self._apply_cache
        got = cache.get(key)
        if got is not None:
            return got
        nodes = self._nodes
        lf, _lo_f, _hi_f = nodes[f]
        lg, _lo_g, _hi_g = nodes[g]
        if lf <= lg:
            lvl, f0, f1 = lf, _lo_f, _hi_f
            if lf < lg:
                g0 = g1 = g
            else:
                g0, g1 = _lo_g, _hi_g
        else:
            lvl, g0, g1 = lg, _lo_g, _hi_g
            f0 = f1 = f
        lo = self._apply(idempotent, table, op, f0, g0)
        hi = self._apply(idempotent, table, op, f1, g1)
        out = lo if lo == hi else self.mk(lvl, lo, hi)
        cache[key] = out
        return out

    def ite(self, f: int, g: int, h: int) -> int:
        """If-then-else: g where f holds, h where it fails, BOT where f is BOT."""
        if f == ONE:
            return g
        if f == ZERO:
            return h
        if f == BOT:
            return BOT
        if g == ONE and h == ZERO:
            return f
        key = (f, g, h)
        cache = self._ite_cache
        got = cache.get(key)
        if got is not None:
            return got
        nodes = self._nodes
        nf, ng, nh = nodes[f], nodes[g], nodes[h]
        lvl = nf[0]
        if ng[0] < lvl:
            lvl = ng[0]
        if nh[0] < lvl:
            lvl = nh[0]
        f0, f1 = (nf[1], nf[2]) if nf[0] == lvl else (f, f)
        g0, g1 = (ng[1], ng[2]) if ng[0] == lvl else (g, g)
        h0, h1 = (nh[1], nh[2]) if nh[0] == lvl else (h, h)
        lo = self.ite(f0, g0, h0)
        hi = self.ite(f1, g1, h1)
        out = lo if lo == hi else self.mk(lvl, lo, hi)
        cache[key] = out
        return out

    def negate(self, f: int) -> int:
        return self.ite(f, ZERO, ONE)

    def compose(self, f: int, subst: dict[int, int]) -> int:
        """Simultaneously substitute diagrams for variables.

        `subst` maps levels to replacement diagrams; unsubstituted variables
        are kept.  All substitutions happen against the original `f`, so a
        replacement may freely mention variables that are themselves being
        replaced.
        """
        memo: dict[int, int] = {}
        nodes = self._nodes
        ite = self.ite

        def rec(u: int) -> int:
            if u < _FIRST_NODE:
                return u
            got = memo.get(u)
            if got is not None:
                return got
            lvl, lo, hi = nodes[u]
            lo2, hi2 = rec(lo), rec(hi)
            g = subst.get(lvl)
            if g is None:
                if lo2 == lo and hi2 == hi:
                    out = u
                else:
                    out = ite(self.var(lvl), hi2, lo2)
            else:
                out = ite(g, hi2, lo2)
            memo[u] = out
            return out

        return rec(f)

    def evaluate(self, f: int, assignment):
        """Follow the assignment; returns 0, 1, or None for BOT.

        The assignment must cover every declared level; levels skipped by
        the diagram consume their bit without effect.
        """
        if len(assignment) != self.n_vars:
            raise DomainError(
                f"assignment has {len(assignment)} bits, engine declares "
                f"{self.n_vars}")
        u = f
        nodes = self._nodes
        while u >= _FIRST_NODE:
            lvl, lo, hi = nodes[u]
            u = hi if assignment[lvl] else lo
        if u == BOT:
            return None
        return u

    # -- inspection --------------------------------------------------------

    def size(self, f: int) -> int:
        """Number of reachable internal (non-terminal) nodes."""
        seen = set()
        stack = [f]
        count = 0
        while stack:
            u = stack.pop()
            if u < _FIRST_NODE or u in seen:
                continue
            seen.add(u)
            count += 1
            _, lo, hi = self._nodes[u]
            stack.extend((lo, hi))
        return count

    def total_size(self, f: int) -> int:
        """Internal nodes plus distinct reachable terminals."""
        seen = set()
        terminals = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u < _FIRST_NODE:
                terminals.add(u)
                continue
            if u in seen:
                continue
            seen.add(u)
            _, lo, hi = self._nodes[u]
            stack.extend((lo, hi))
        return len(seen) + len(terminals)

    def support(self, f: int) -> set[int]:
        """Levels actually tested somewhere in the diagram."""
        seen = set()
        levels = set()
        stack = [f]
        while stack:
            u = stack.pop()
            if u < _FIRST_NODE or u in seen:
                continue
            seen.add(u)
            lvl, lo, hi = self._nodes[u]
            levels.add(lvl)
            stack.extend((lo, hi))
        return levels

    def to_dot(self, f: int, level_names=None) -> str:
        """DOT text for debugging; lo edges dashed, hi edges solid."""
        term_label = {ZERO: "0", ONE: "1", BOT: "⊥"}
        lines = ["digraph bdd {"]
        seen = set()
        order = []
        stack = [f]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            order.append(u)
            if u >= _FIRST_NODE:
                _, lo, hi = self._nodes[u]
                stack.extend((hi, lo))
        for u in sorted(order):
            if u < _FIRST_NODE:
                lines.append(f'  n{u} [shape=box, label="{term_label[u]}"];')
            else:
                lvl, lo, hi = self._nodes[u]
                name = level_names[lvl] if level_names else f"x{lvl}"
                lines.append(f'  n{u} [shape=circle, label="{name}"];')
                lines.append(f"  n{u} -> n{lo} [style=dashed];")
                lines.append(f"  n{u} -> n{hi};")
        lines.append("}")
        return "\n".join(lines)

    def clear_caches(self):
        """Drop apply/ite memo tables (call between unrelated compilations)."""
        self._apply_cache.clear()
        self._ite_cache.clear()

    def __len__(self):
        return len(self._nodes) - _FIRST_NODE
