import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from specinfer import Monitor, RandomBitPA, circuits as c


def random_expr(rng: random.Random, names, depth=3):
    """A random gate tree over the given input names."""
    if depth == 0 or rng.random() < 0.25:
        if names and rng.random() < 0.85:
            return c.Input(rng.choice(names))
        return c.Const(rng.random() < 0.5)
    kind = rng.randrange(5)
    if kind == 0:
        return c.Not(random_expr(rng, names, depth - 1))
    a = random_expr(rng, names, depth - 1)
    b = random_expr(rng, names, depth - 1)
    if kind == 1:
        return c.And(a, b)
    if kind == 2:
        return c.Or(a, b)
    if kind == 3:
        return c.Xor(a, b)
    return c.Ite(random_expr(rng, names, depth - 1), a, b)


def random_pa(rng: random.Random, max_state_bits=2, max_action_bits=2,
              max_coin_bits=2, allow_invalid_actions=True) -> RandomBitPA:
    n_s = rng.randint(0, max_state_bits)
    n_a = rng.randint(1, max_action_bits)
    n_c = rng.randint(0, max_coin_bits)
    names = [("s", i) for i in range(n_s)]
    names += [("a", i) for i in range(n_a)]
    names += [("c", i) for i in range(n_c)]
    nxt = tuple(random_expr(rng, names) for _ in range(n_s))
    valid = c.TRUE
    if allow_invalid_actions and n_a > 1 and rng.random() < 0.3:
        # Prune the top action code so BOT handling gets exercised.
        abits = [c.Input(("a", i)) for i in range(n_a)]
        valid = c.uint_lt_const(abits, (1 << n_a) - 1)
    return RandomBitPA(
        n_state_bits=n_s,
        n_action_bits=n_a,
        n_coin_bits=n_c,
        initial_state=rng.randrange(1 << n_s) if n_s else 0,
        next_state=nxt,
        valid_action=valid,
    )


def random_monitor(rng: random.Random, pa: RandomBitPA,
                   max_history_bits=2) -> Monitor:
    n_h = rng.randint(0, max_history_bits)
    upd_names = [("h", i) for i in range(n_h)]
    upd_names += [("a", i) for i in range(pa.n_action_bits)]
    upd_names += [("s", i) for i in range(pa.n_state_bits)]
    acc_names = [("h", i) for i in range(n_h)]
    acc_names += [("s", i) for i in range(pa.n_state_bits)]
    return Monitor(
        n_state_bits=pa.n_state_bits,
        n_action_bits=pa.n_action_bits,
        n_history_bits=n_h,
        initial_history=rng.randrange(1 << n_h) if n_h else 0,
        update=tuple(random_expr(rng, upd_names) for _ in range(n_h)),
        accept=random_expr(rng, acc_names),
    )


def random_instance(rng: random.Random, max_tau=4, **pa_kwargs):
    pa = random_pa(rng, **pa_kwargs)
    mon = random_monitor(rng, pa)
    tau = rng.randint(1, max_tau)
    return pa, mon, tau


@pytest.fixture
def rng():
    return random.Random(0)
