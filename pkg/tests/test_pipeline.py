"""Demonstration encoding, likelihoods, and candidate ranking."""
import itertools
import math
import random

import pytest

from specinfer import (Demonstration, DomainError, GridCoinCache,
                       ImpossibleTransitionError, Monitor, RandomBitPA,
                       demo_log_likelihood, empirical_sat_prob, encode_demo,
                       infer_coins, make_gridworld, rank, true_monitor,
                       unroll, value_backup, circuits as c)
from specinfer.planner import PolicyWalker
from conftest import random_instance
from oracles import enumerate_demos


def logistic_bundle():
    pa = RandomBitPA(0, 1, 0, 0, ())
    mon = Monitor(0, 1, 1, 0, (c.Input(("a", 0)),), c.Input(("h", 0)))
    return pa, mon, unroll(pa, mon, 1)


class TestInferCoins:
    def test_slip_versus_intended_counts(self):
        # Right/down world with downward slip on 3 coin bits.
        w = make_gridworld(4, 4, 1, 3, slip_dir="down",
                           actions=("right", "down"))
        s = w.cell_id(1, 1)
        right = w.action_id("right")
        assert infer_coins(w.pa, s, right, w.cell_id(1, 2)) == (0,)
        assert infer_coins(w.pa, s, right, w.cell_id(2, 1)) == \
            tuple(range(1, 8))

    def test_deterministic_world_single_empty_coin(self):
        w = make_gridworld(3, 3, 0, 0)
        s = w.cell_id(1, 1)
        assert infer_coins(w.pa, s, w.action_id("up"), w.cell_id(1, 0)) == (0,)

    def test_constraint_search_matches_enumeration(self, monkeypatch):
        w = make_gridworld(4, 4, 3, 4)
        import specinfer.pipeline as pipeline
        s = w.cell_id(2, 2)
        for a in w.pa.action_ids():
            for s2 in range(w.pa.n_states):
                by_enum = infer_coins(w.pa, s, a, s2)
                monkeypatch.setattr(pipeline, "_ENUMERATION_LIMIT", -1)
                by_search = infer_coins(w.pa, s, a, s2)
                monkeypatch.undo()
                assert by_enum == by_search


class TestGridCoinCache:
    def test_cache_equals_fresh_enumeration(self):
        w = make_gridworld(3, 3, 1, 2, slip_dir="left")
        cache = GridCoinCache(w)
        for x, y in itertools.product(range(3), range(3)):
            s = w.cell_id(x, y)
            for a in w.pa.action_ids():
                for x2, y2 in itertools.product(range(3), range(3)):
                    s2 = w.cell_id(x2, y2)
                    assert cache.coins(s, a, s2) == infer_coins(w.pa, s, a, s2)


class TestEncodeDemo:
    def test_bits_replay_the_states(self):
        w = make_gridworld(4, 4, 1, 3)
        b = unroll(w.pa, true_monitor(w.pa.n_state_bits, w.pa.n_action_bits), 3)
        demo = Demonstration(((w.action_id("right"), w.cell_id(1, 0)),
                              (w.action_id("down"), w.cell_id(1, 1)),
                              (w.action_id("down"), w.cell_id(0, 1))))  # slip
        enc = encode_demo(b, demo)
        s = w.pa.initial_state
        for t, (a, s2) in enumerate(demo.steps):
            coin = sum(enc.bits[b.meta.coin_level(t, j)] << j
                       for j in range(b.meta.n_coin_bits))
            a_bits = sum(enc.bits[b.meta.action_level(t, i)] << i
                         for i in range(b.meta.n_action_bits))
            assert a_bits == a
            s = w.pa.step(s, a, coin)
            assert s == s2

    def test_impossible_step_is_named(self):
        w = make_gridworld(4, 4, 0, 0)  # deterministic: no slips possible
        b = unroll(w.pa, true_monitor(w.pa.n_state_bits, w.pa.n_action_bits), 2)
        demo = Demonstration(((w.action_id("right"), w.cell_id(1, 0)),
                              (w.action_id("right"), w.cell_id(1, 1))))
        with pytest.raises(ImpossibleTransitionError) as info:
            encode_demo(b, demo, demo_index=4)
        assert info.value.step == 1
        assert info.value.demo_index == 4


class TestDemoLogLikelihood:
    def test_uniform_policy_closed_form(self):
        # Deterministic four-action world, any demo: tau * ln(1/4).
        w = make_gridworld(4, 4, 0, 0)
        b = unroll(w.pa, true_monitor(w.pa.n_state_bits, w.pa.n_action_bits),
                   10)
        vt = value_backup(b, 0.0)
        steps = []
        x, y = 0, 0
        for t in range(10):
            if x < 3:
                x += 1
                steps.append((w.action_id("right"), w.cell_id(x, y)))
            else:
                y = min(y + 1, 3)
                steps.append((w.action_id("down"), w.cell_id(x, y)))
        ll = demo_log_likelihood(b, vt, Demonstration(tuple(steps)))
        assert ll == pytest.approx(10 * math.log(1 / 4), abs=1e-9)
        assert ll == pytest.approx(-13.8629, abs=1e-4)

    def test_logistic_closed_form(self):
        pa, mon, b = logistic_bundle()
        vt = value_backup(b, math.log(4))
        ll = demo_log_likelihood(b, vt, Demonstration(((1, 0),)))
        assert ll == pytest.approx(math.log(0.8), abs=1e-12)

    def test_total_probability_sums_to_one(self):
        rng = random.Random(40)
        done = 0
        while done < 12:
            pa, mon, tau = random_instance(rng)
            if (len(pa.action_ids()) * (1 << pa.n_coin_bits)) ** tau > 2048:
                continue
            b = unroll(pa, mon, tau)
            vt = value_backup(b, rng.uniform(0, 4))
            total = sum(
                math.exp(demo_log_likelihood(b, vt, Demonstration(d)))
                for d in enumerate_demos(pa, tau))
            assert total == pytest.approx(1.0, abs=1e-6)
            done += 1

    def test_gridworld_total_probability(self):
        w = make_gridworld(2, 2, 1, 1, tiles=["wy", "ww"])
        from specinfer import reach
        b = unroll(w.pa, reach(w, "yellow"), 3)
        vt = value_backup(b, 2.5)
        total = sum(math.exp(demo_log_likelihood(b, vt, Demonstration(d)))
                    for d in enumerate_demos(w.pa, 3))
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_choice_of_witness_coin_is_irrelevant(self):
        w = make_gridworld(3, 1, 1, 2, slip_dir="left")
        from specinfer import reach
        b = unroll(w.pa, reach(w, "white"), 2)
        vt = value_backup(b, 1.0)
        left = w.action_id("left")
        demo = Demonstration(((left, w.cell_id(0, 0)),
                              (left, w.cell_id(0, 0))))
        # moving left coincides with the slip direction: all 4 coins match
        step_coins = [infer_coins(w.pa, w.cell_id(0, 0), left, w.cell_id(0, 0))
                      for _ in range(2)]
        assert all(len(coins) == 4 for coins in step_coins)
        lls = []
        for combo in itertools.product(*step_coins):
            walker = PolicyWalker(b, vt)
            total = 0.0
            for t, (a, _) in enumerate(demo.steps):
                total += walker.take_action(a)
                walker.take_coins(combo[t])
                total += math.log(len(step_coins[t]) / 4)
            lls.append(total)
        assert max(lls) - min(lls) == 0.0
        assert demo_log_likelihood(b, vt, demo) == pytest.approx(lls[0])


class TestEmpiricalSatProb:
    def test_five_of_six_untouched(self):
        pa, mon, b = logistic_bundle()
        demos = [Demonstration(((1, 0),))] * 5 + [Demonstration(((0, 0),))]
        assert empirical_sat_prob(demos, mon, 0) == pytest.approx(5 / 6)

    def test_all_satisfying_clamps(self):
        pa, mon, b = logistic_bundle()
        demos = [Demonstration(((1, 0),))] * 4
        assert empirical_sat_prob(demos, mon, 0) == \
            pytest.approx(1 - 1 / (2 * 4 + 2))

    def test_true_monitor_clamps_from_one(self):
        mon = true_monitor(0, 1)
        demos = [Demonstration(((0, 0),))] * 3
        assert empirical_sat_prob(demos, mon, 0) == \
            pytest.approx(1 - 1 / 8)

    def test_empty_demos_rejected(self):
        with pytest.raises(DomainError):
            empirical_sat_prob([], true_monitor(0, 1), 0)


class TestRank:
    def test_single_true_candidate(self):
        pa, mon, _ = logistic_bundle()
        demos = [Demonstration(((1, 0),))]
        report = rank([("true", true_monitor(0, 1))], pa, 1, demos)
        assert len(report.rows) == 1
        assert report.rows[0].rel_log_likelihood == 0.0

    def test_logistic_two_candidate_example(self):
        # One demo taking action 1; the action monitor fits p = 3/4 after
        # clamping, so its relative log likelihood is ln(0.75/0.5).
        pa, mon, _ = logistic_bundle()
        demos = [Demonstration(((1, 0),))]
        report = rank([("take_one", mon), ("true", true_monitor(0, 1))],
                      pa, 1, demos, tol=1e-8)
        by_name = {row.name: row for row in report.rows}
        assert by_name["take_one"].p_hat == pytest.approx(3 / 4)
        assert by_name["take_one"].theta == pytest.approx(math.log(3), abs=1e-3)
        assert by_name["take_one"].rel_log_likelihood == \
            pytest.approx(math.log(0.75 / 0.5), abs=1e-6)
        assert by_name["true"].rel_log_likelihood == 0.0
        assert report.rows[0].name == "take_one"

    def test_priors_shift_the_posterior(self):
        pa, mon, _ = logistic_bundle()
        demos = [Demonstration(((1, 0),))]
        report = rank([("take_one", mon), ("true", true_monitor(0, 1))],
                      pa, 1, demos,
                      log_priors={"take_one": -10.0, "true": 0.0})
        assert report.rows[0].name == "true"

    def test_jobs_do_not_change_the_report(self):
        w = make_gridworld(2, 2, 1, 1, tiles=["wy", "ww"])
        from specinfer import reach
        demos = [Demonstration(((w.action_id("right"), w.cell_id(1, 0)),
                                (w.action_id("down"), w.cell_id(1, 1))))]
        cands = [("goal", reach(w, "yellow")),
                 ("true", true_monitor(w.pa.n_state_bits, w.pa.n_action_bits))]
        serial = rank(cands, w.pa, 2, demos)
        threaded = rank(cands, w.pa, 2, demos, jobs=2)
        assert serial.to_tsv() == threaded.to_tsv()

    def test_tsv_shape(self):
        pa, mon, _ = logistic_bundle()
        report = rank([("true", true_monitor(0, 1))], pa, 1,
                      [Demonstration(((0, 0),))])
        lines = report.to_tsv().strip().splitlines()
        assert lines[0].split("\t")[0] == "spec"
        assert len(lines) == 2
