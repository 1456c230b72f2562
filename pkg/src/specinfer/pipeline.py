"""From concrete demonstrations to candidate-specification posteriors.

A demonstration is a sequence of (action, state) pairs starting implicitly
at the dynamics' initial state.  Each step is re-expressed as action bits
plus a witness coin string consistent with the observed transition; the
likelihood of the step multiplies the walked policy probability by the exact
transition probability (matching coin count over 2**q), so the particular
witness chosen never matters.  Candidates are scored by total demonstration
log likelihood relative to the uniform-policy baseline, plus log prior.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import circuits as c
from .bdd import ONE, Engine
from .compiler import TraceBdd, unroll
from .dynamics import Gridworld, RandomBitPA, transition_counts
from .errors import DomainError, ImpossibleTransitionError
from .monitor import Monitor, accepts, true_monitor
from .planner import PolicySolution, PolicyWalker, fit_theta, value_backup

_ENUMERATION_LIMIT = 16  # coin bits; above this, search the circuit instead


@dataclass(frozen=True)
class Demonstration:
    """(action id, resulting state id) pairs; the start state is implicit."""

    steps: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class EncodedDemo:
    bits: tuple[int, ...]
    coins: tuple[int, ...]
    step_probs: tuple[Fraction, ...]


def infer_coins(pa: RandomBitPA, s: int, a: int, s2: int) -> tuple[int, ...]:
    """All coin strings under which action `a` maps `s` to `s2`, ascending.

    Small coin spaces are enumerated outright; larger ones are solved by
    compiling the per-bit transition constraints into a decision diagram
    over the coin bits and reading its satisfying assignments back out.
    """
    if not pa.is_valid_action(a):
        raise DomainError(f"invalid action encoding {a}")
    q = pa.n_coin_bits
    if q <= _ENUMERATION_LIMIT:
        return tuple(coin for coin in range(1 << q)
                     if pa.step(s, a, coin) == s2)
    engine = Engine(q)
    binding = {("c", j): engine.var(j) for j in range(q)}
    binding.update({("s", i): engine.const((s >> i) & 1)
                    for i in range(pa.n_state_bits)})
    binding.update({("a", i): engine.const((a >> i) & 1)
                    for i in range(pa.n_action_bits)})
    constraint = ONE
    for i, expr in enumerate(pa.next_state):
        bit = c.to_bdd(expr, engine, binding)
        want = (s2 >> i) & 1
        constraint = engine.apply(
            "and", constraint, bit if want else engine.negate(bit))
    return tuple(sorted(_satisfying(engine, constraint, q)))


def _satisfying(engine: Engine, node: int, width: int):
    """Integers on which `node` evaluates to 1 (level j = bit of weight 2**j)."""

    def rec(u: int, level: int):
        if u == engine.ZERO or u == engine.BOT:
            return
        if level == width:
            yield 0
            return
        if engine.level(u) == level:
            _, lo, hi = engine.node(u)
        else:
            lo = hi = u
        yield from rec(lo, level + 1)
        for rest in rec(hi, level + 1):
            yield rest | (1 << level)

    yield from rec(node, 0)


class GridCoinCache:
    """Memoized coin inference for translation-invariant gridworlds.

    The coin -> displacement map depends only on the action and on which
    grid edges clamp at the source cell, so results are keyed by
    (action, displacement, edge signature) and shared across cells.
    """

    def __init__(self, world: Gridworld):
        self.world = world
        self._table: dict[tuple, tuple[int, ...]] = {}

    def coins(self, s: int, a: int, s2: int) -> tuple[int, ...]:
        world = self.world
        x, y = world.cell_of(s)
        x2, y2 = world.cell_of(s2)
        sig = (x == 0, x == world.width - 1, y == 0, y == world.height - 1)
        key = (a, x2 - x, y2 - y, sig)
        got = self._table.get(key)
        if got is None:
            got = infer_coins(world.pa, s, a, s2)
            self._table[key] = got
        return got


def encode_demo(b: TraceBdd, demo: Demonstration, coin_source=None,
                demo_index=None) -> EncodedDemo:
    """Pick witness coins per step and lay the bits out level by level."""
    pa, meta = b.pa, b.meta
    if len(demo) != meta.tau:
        raise DomainError(
            f"demonstration has {len(demo)} steps, diagram expects {meta.tau}")
    find = coin_source.coins if coin_source is not None else \
        (lambda s, a, s2: infer_coins(pa, s, a, s2))
    bits = [0] * meta.n_levels
    coins = []
    probs = []
    s = pa.initial_state
    denom = 1 << pa.n_coin_bits
    for t, (a, s2) in enumerate(demo.steps):
        matching = find(s, a, s2)
        if not matching:
            raise ImpossibleTransitionError(
                f"step {t}: no coin outcome takes state {s} to {s2} "
                f"under action {a}", demo_index=demo_index, step=t)
        coin = matching[0]
        coins.append(coin)
        probs.append(Fraction(len(matching), denom))
        meta.encode_step(t, a, coin, bits)
        s = s2
    return EncodedDemo(tuple(bits), tuple(coins), tuple(probs))


def demo_log_likelihood(b: TraceBdd, vt, demo: Demonstration,
                        coin_source=None, demo_index=None) -> float:
    """log Pr(demo) = sum of log policy terms and log transition terms."""
    encoded = encode_demo(b, demo, coin_source, demo_index)
    walker = PolicyWalker(b, vt)
    total = 0.0
    for t, (a, _) in enumerate(demo.steps):
        total += walker.take_action(a)
        walker.take_coins(encoded.coins[t])
        total += math.log(encoded.step_probs[t])
    return total


def clamp_probability(p: float, n_demos: int) -> float:
    """Keep empirical frequencies away from 0/1 so the fit stays finite."""
    low = 1.0 / (2 * n_demos + 2)
    return min(max(p, low), 1.0 - low)


def empirical_sat_prob(demos, m: Monitor, s0: int, clamp: bool = True) -> float:
    """Fraction of demonstrations the monitor accepts, smoothed by default."""
    if not demos:
        raise DomainError("need at least one demonstration")
    hits = sum(1 for d in demos if accepts(m, d.steps, s0))
    p = hits / len(demos)
    return clamp_probability(p, len(demos)) if clamp else p


@dataclass
class RankRow:
    name: str
    internal_nodes: int
    total_nodes: int
    compile_seconds: float
    node_bound: int
    theta: float
    p_hat: float
    log_likelihood: float
    rel_log_likelihood: float
    log_prior: float
    log_posterior: float
    converged: bool

    def to_record(self) -> dict:
        return {
            "spec": self.name,
            "internal_nodes": self.internal_nodes,
            "total_nodes": self.total_nodes,
            "compile_seconds": self.compile_seconds,
            "node_bound": self.node_bound,
            "theta": self.theta,
            "p_hat": self.p_hat,
            "log_likelihood": self.log_likelihood,
            "rel_log_likelihood": self.rel_log_likelihood,
            "log_prior": self.log_prior,
            "log_posterior": self.log_posterior,
            "converged": self.converged,
        }


TSV_COLUMNS = ("spec", "internal_nodes", "theta", "p_hat", "log_likelihood",
               "rel_log_likelihood", "log_prior", "log_posterior")


@dataclass
class LikelihoodReport:
    rows: list[RankRow] = field(default_factory=list)

    def to_tsv(self) -> str:
        lines = ["\t".join(TSV_COLUMNS)]
        for row in self.rows:
            rec = row.to_record()
            cells = []
            for col in TSV_COLUMNS:
                v = rec[col]
                cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_records(self) -> list[dict]:
        return [row.to_record() for row in self.rows]


def _is_true_monitor(m: Monitor) -> bool:
    return (m.n_history_bits == 0 and isinstance(m.accept, c.Const)
            and m.accept.value)


def fit_candidate(b: TraceBdd, demos, tol: float = 1e-4) -> PolicySolution:
    """Fit the rationality coefficient to the empirical satisfaction rate."""
    p_hat = empirical_sat_prob(demos, b.monitor, b.pa.initial_state)
    return fit_theta(b, p_hat, tol=tol)


def rank(candidates, pa: RandomBitPA, tau: int, demos, tol: float = 1e-4,
         log_priors: dict[str, float] | None = None, jobs: int = 1,
         coin_source=None) -> LikelihoodReport:
    """Score every named candidate monitor against the demonstrations.

    `candidates` is a sequence of (name, Monitor).  The uniform-policy
    baseline (the always-true specification) is always evaluated; its row is
    reused if a candidate is itself the true monitor, which pins that row's
    relative log likelihood at exactly zero.  Priors default to uniform over
    the candidate set.
    """
    candidates = list(candidates)
    if not candidates:
        raise DomainError("need at least one candidate specification")
    demos = [d if isinstance(d, Demonstration) else Demonstration(tuple(d))
             for d in demos]

    def evaluate(item):
        name, m = item
        b = unroll(pa, m, tau)
        solution = fit_candidate(b, demos, tol=tol)
        ll = sum(demo_log_likelihood(b, solution.table, d, coin_source, i)
                 for i, d in enumerate(demos))
        return name, b, solution, ll

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, candidates))
    else:
        results = [evaluate(item) for item in candidates]

    baseline_ll = None
    for (name, m), (_, b, solution, ll) in zip(candidates, results):
        if _is_true_monitor(m):
            baseline_ll = ll
            break
    if baseline_ll is None:
        base = true_monitor(pa.n_state_bits, pa.n_action_bits)
        b = unroll(pa, base, tau)
        vt = value_backup(b, 0.0)
        baseline_ll = sum(
            demo_log_likelihood(b, vt, d, coin_source, i)
            for i, d in enumerate(demos))

    uniform_prior = -math.log(len(candidates))
    rows = []
    for (name, m), (_, b, solution, ll) in zip(candidates, results):
        log_prior = uniform_prior if log_priors is None \
            else log_priors.get(name, uniform_prior)
        rows.append(RankRow(
            name=name,
            internal_nodes=b.stats.internal_nodes,
            total_nodes=b.stats.total_nodes,
            compile_seconds=b.stats.seconds,
            node_bound=b.stats.node_bound,
            theta=solution.theta,
            p_hat=solution.target,
            log_likelihood=ll,
            rel_log_likelihood=ll - baseline_ll,
            log_prior=log_prior,
            log_posterior=ll + log_prior,
            converged=solution.converged,
        ))
    rows.sort(key=lambda r: -r.log_posterior)  # stable: ties keep config order
    return LikelihoodReport(rows)


# -- demonstration files ---------------------------------------------------


def demos_from_json(data: dict, world: Gridworld) -> list[Demonstration]:
    """Decode [(action name, [x, y]), ...] records against a gridworld."""
    try:
        raw = data["demos"]
    except KeyError:
        raise DomainError("demo file is missing the 'demos' field") from None
    out = []
    for index, record in enumerate(raw):
        steps = []
        try:
            for name, cell in record:
                steps.append((world.action_id(name), world.cell_id(*cell)))
        except (TypeError, ValueError) as e:
            raise DomainError(f"demo {index} is malformed: {e}") from None
        out.append(Demonstration(tuple(steps)))
    return out


def load_demos(path, world: Gridworld) -> list[Demonstration]:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise DomainError(f"demo file {path}: {e}") from None
    return demos_from_json(data, world)
