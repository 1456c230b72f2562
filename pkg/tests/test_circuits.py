"""Circuit DSL: evaluation, comparators, renaming, diagram compilation."""
import itertools
import random

import pytest

from specinfer import DomainError, Engine, circuits as c
from conftest import random_expr
from oracles import expr_truth_table


class TestEvaluate:
    def test_gate_semantics(self):
        x, y = c.Input(("x", 0)), c.Input(("x", 1))
        env = {("x", 0): 1, ("x", 1): 0}
        assert c.evaluate(c.And(x, y), env) == 0
        assert c.evaluate(c.Or(x, y), env) == 1
        assert c.evaluate(c.Xor(x, y), env) == 1
        assert c.evaluate(c.Not(y), env) == 1
        assert c.evaluate(c.Ite(x, y, c.TRUE), env) == 0

    def test_undeclared_input(self):
        with pytest.raises(DomainError):
            c.evaluate(c.Input(("z", 9)), {})


class TestComparators:
    @pytest.mark.parametrize("width", [0, 1, 3, 5])
    def test_eq_const_all_values(self, width):
        bits = [c.Input(("x", i)) for i in range(width)]
        for target in range(1 << width):
            expr = c.eq_const(bits, target)
            for value in range(1 << width):
                env = {("x", i): (value >> i) & 1 for i in range(width)}
                assert c.evaluate(expr, env) == int(value == target)

    @pytest.mark.parametrize("width", [1, 3, 5])
    def test_uint_lt_const_all_values(self, width):
        bits = [c.Input(("x", i)) for i in range(width)]
        for target in range((1 << width) + 2):
            expr = c.uint_lt_const(bits, target)
            for value in range(1 << width):
                env = {("x", i): (value >> i) & 1 for i in range(width)}
                assert c.evaluate(expr, env) == int(value < target)

    def test_bit_round_trip(self):
        for value in range(32):
            assert c.bits_to_int(c.int_to_bits(value, 5)) == value
        with pytest.raises(DomainError):
            c.int_to_bits(32, 5)


class TestRename:
    def test_moves_history_inputs(self):
        expr = c.And(c.Input(("h", 0)), c.Input(("s", 1)))
        out = c.rename(expr, {("h", 0): ("h", 3)})
        assert c.inputs_of(out) == {("h", 3), ("s", 1)}
        env = {("h", 3): 1, ("s", 1): 1}
        assert c.evaluate(out, env) == 1

    def test_inputs_of_collects_every_leaf(self):
        rng = random.Random(9)
        names = [("x", i) for i in range(4)]
        for _ in range(20):
            expr = random_expr(rng, names)
            found = c.inputs_of(expr)
            assert found <= set(names)
            table = expr_truth_table(expr, names)
            for name in set(names) - found:
                # an unreferenced input never changes the verdict
                idx = names.index(name)
                for bits in itertools.product((0, 1), repeat=4):
                    flipped = list(bits)
                    flipped[idx] ^= 1
                    pos = sum(b << (3 - k) for k, b in enumerate(bits))
                    pos2 = sum(b << (3 - k) for k, b in enumerate(flipped))
                    assert table[pos] == table[pos2]


class TestToBdd:
    def test_matches_direct_evaluation(self):
        rng = random.Random(10)
        names = [("x", i) for i in range(5)]
        for _ in range(30):
            expr = random_expr(rng, names)
            e = Engine(5)
            node = c.to_bdd(expr, e, {("x", i): e.var(i) for i in range(5)})
            want = expr_truth_table(expr, names)
            got = [e.evaluate(node, list(bits))
                   for bits in itertools.product((0, 1), repeat=5)]
            assert got == want

    def test_unbound_input_rejected(self):
        e = Engine(1)
        with pytest.raises(DomainError):
            c.to_bdd(c.Input(("x", 0)), e, {})
