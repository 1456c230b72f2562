"""Bit-level Boolean circuits over named inputs.

Circuits are immutable expression DAGs built from AND/OR/NOT/XOR/ITE/CONST
gates over inputs named by (kind, index) pairs, e.g. ("s", 0) for state bit
zero.  The same circuit can be evaluated on concrete bits or compiled into a
decision diagram with each input bound to an arbitrary diagram node, which is
how transition relations get composed without ever flattening them.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

Name = tuple[str, int]


class BitExpr:
    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Input(BitExpr):
    name: Name


@dataclass(frozen=True, eq=False)
class Const(BitExpr):
    value: bool


@dataclass(frozen=True, eq=False)
class Not(BitExpr):
    x: BitExpr


@dataclass(frozen=True, eq=False)
class And(BitExpr):
    x: BitExpr
    y: BitExpr


@dataclass(frozen=True, eq=False)
class Or(BitExpr):
    x: BitExpr
    y: BitExpr


@dataclass(frozen=True, eq=False)
class Xor(BitExpr):
    x: BitExpr
    y: BitExpr


@dataclass(frozen=True, eq=False)
class Ite(BitExpr):
    cond: BitExpr
    then: BitExpr
    other: BitExpr


TRUE = Const(True)
FALSE = Const(False)


def all_of(exprs) -> BitExpr:
    exprs = list(exprs)
    if not exprs:
        return TRUE
    out = exprs[0]
    for e in exprs[1:]:
        out = And(out, e)
    return out


def any_of(exprs) -> BitExpr:
    exprs = list(exprs)
    if not exprs:
        return FALSE
    out = exprs[0]
    for e in exprs[1:]:
        out = Or(out, e)
    return out


def int_to_bits(value: int, width: int) -> tuple[int, ...]:
    """Little-endian bit vector of `value` (bit i has weight 2**i)."""
    if value < 0 or value >= (1 << width):
        raise DomainError(f"value {value} does not fit in {width} bits")
    return tuple((value >> i) & 1 for i in range(width))


def bits_to_int(bits) -> int:
    out = 0
    for i, b in enumerate(bits):
        out |= (b & 1) << i
    return out


def eq_const(bits: list[BitExpr], value: int) -> BitExpr:
    """Predicate: little-endian bit vector equals the constant `value`."""
    if value >= (1 << len(bits)) and bits:
        return FALSE
    if not bits:
        return TRUE if value == 0 else FALSE
    terms = []
    for i, b in enumerate(bits):
        terms.append(b if (value >> i) & 1 else Not(b))
    return all_of(terms)


def uint_lt_const(bits: list[BitExpr], value: int) -> BitExpr:
    """Predicate: little-endian bit vector is strictly below `value`."""
    if value <= 0:
        return FALSE
    if value >= (1 << len(bits)):
        return TRUE
    # Fold LSB to MSB: after step i, `out` compares the low i+1 bits.
    out = FALSE
    for i in range(len(bits)):
        if (value >> i) & 1:
            out = Or(Not(bits[i]), out)
        else:
            out = And(Not(bits[i]), out)
    return out


def evaluate(expr: BitExpr, env: dict[Name, int]) -> int:
    """Evaluate to 0/1 with every input looked up in `env`."""
    memo: dict[int, int] = {}

    def rec(e: BitExpr) -> int:
        key = id(e)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(e, Input):
            try:
                v = env[e.name] & 1
            except KeyError:
                raise DomainError(f"undeclared circuit input {e.name!r}") from None
        elif isinstance(e, Const):
            v = int(e.value)
        elif isinstance(e, Not):
            v = 1 - rec(e.x)
        elif isinstance(e, And):
            v = rec(e.x) & rec(e.y)
        elif isinstance(e, Or):
            v = rec(e.x) | rec(e.y)
        elif isinstance(e, Xor):
            v = rec(e.x) ^ rec(e.y)
        elif isinstance(e, Ite):
            v = rec(e.then) if rec(e.cond) else rec(e.other)
        else:
            raise TypeError(f"not a circuit node: {e!r}")
        memo[key] = v
        return v

    return rec(expr)


def inputs_of(expr: BitExpr) -> set[Name]:
    seen: set[int] = set()
    names: set[Name] = set()
    stack = [expr]
    while stack:
        e = stack.pop()
        if id(e) in seen:
            continue
        seen.add(id(e))
        if isinstance(e, Input):
            names.add(e.name)
        elif isinstance(e, Not):
            stack.append(e.x)
        elif isinstance(e, (And, Or, Xor)):
            stack.extend((e.x, e.y))
        elif isinstance(e, Ite):
            stack.extend((e.cond, e.then, e.other))
    return names


def rename(expr: BitExpr, mapping: dict[Name, Name]) -> BitExpr:
    """Rewrite input names; names absent from `mapping` pass through."""
    memo: dict[int, BitExpr] = {}

    def rec(e: BitExpr) -> BitExpr:
        key = id(e)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(e, Input):
            out = Input(mapping.get(e.name, e.name))
        elif isinstance(e, Const):
            out = e
        elif isinstance(e, Not):
            out = Not(rec(e.x))
        elif isinstance(e, And):
            out = And(rec(e.x), rec(e.y))
        elif isinstance(e, Or):
            out = Or(rec(e.x), rec(e.y))
        elif isinstance(e, Xor):
            out = Xor(rec(e.x), rec(e.y))
        elif isinstance(e, Ite):
            out = Ite(rec(e.cond), rec(e.then), rec(e.other))
        else:
            raise TypeError(f"not a circuit node: {e!r}")
        memo[key] = out
        return out

    return rec(expr)


def to_bdd(expr: BitExpr, engine, binding: dict[Name, int]) -> int:
    """Compile the circuit into `engine`, binding each input to a diagram node.

    Bound nodes may be plain variables or whole diagrams, so this doubles as
    simultaneous substitution of circuits into circuits.
    """
    memo: dict[int, int] = {}

    def rec(e: BitExpr) -> int:
        key = id(e)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(e, Input):
            try:
                v = binding[e.name]
            except KeyError:
                raise DomainError(f"unbound circuit input {e.name!r}") from None
        elif isinstance(e, Const):
            v = engine.ONE if e.value else engine.ZERO
        elif isinstance(e, Not):
            v = engine.ite(rec(e.x), engine.ZERO, engine.ONE)
        elif isinstance(e, And):
            v = engine.apply("and", rec(e.x), rec(e.y))
        elif isinstance(e, Or):
            v = engine.apply("or", rec(e.x), rec(e.y))
        elif isinstance(e, Xor):
            v = engine.apply("xor", rec(e.x), rec(e.y))
        elif isinstance(e, Ite):
            v = engine.ite(rec(e.cond), rec(e.then), rec(e.other))
        else:
            raise TypeError(f"not a circuit node: {e!r}")
        memo[key] = v
        return v

    return rec(expr)
