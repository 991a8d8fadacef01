"""Exhaustive verifier: accepts the reference plans, refutes broken ones."""

import dataclasses

import pytest

from mappcf.core import (
    CORRECT,
    NFD,
    SEQ,
    Graph,
    Instance,
    Plan,
    Solution,
    TransitionRule,
    validate_instance,
    validate_solution,
)
from mappcf.execution import run_seq, run_syn
from mappcf.gen import fixture
from mappcf.verify import verify, verify_seq, verify_syn


def strip_rules(sol, agent):
    plans = list(sol.plans)
    plans[agent] = dataclasses.replace(plans[agent], rules=())
    return dataclasses.replace(sol, plans=tuple(plans))


class TestReferenceSolutions:
    def test_two_corridor_syn(self):
        fx = fixture("fig1")
        r = verify_syn(fx.instance, fx.solutions[0], f=1)
        assert r.ok and r.status == "verified"
        assert r.states_explored == 6

    def test_two_corridor_seq(self):
        fx = fixture("fig1")
        r = verify_seq(fx.instance, fx.solutions[1], f=1)
        assert r.ok
        assert r.states_explored == 23

    def test_wait_and_watch_syn(self):
        fx = fixture("fig3")
        r = verify_syn(fx.instance, fx.solutions[0], f=1)
        assert r.ok
        assert r.states_explored == 12

    def test_three_agent_syn(self):
        fx = fixture("fig6")
        assert verify_syn(fx.instance, fx.solutions[0], f=1).states_explored == 10
        assert verify_syn(fx.instance, fx.solutions[0], f=2).states_explored == 16

    def test_hexagon_seq(self):
        fx = fixture("seq_anonymous")
        r = verify_seq(fx.instance, fx.solutions[0], f=2)
        assert r.ok
        assert r.states_explored == 287


class TestRefutations:
    def test_syn_missing_rules_collide(self):
        fx = fixture("fig1")
        r = verify_syn(fx.instance, strip_rules(fx.solutions[0], 1), f=1)
        assert r.status == "refuted"
        ce = r.counterexample
        assert ce.kind == "collision"
        assert ce.agents == (0, 1)
        assert ce.crash_times == {0: 2}

    def test_syn_witness_replays(self):
        # the returned crash pattern must actually break the run
        fx = fixture("fig1")
        broken = strip_rules(fx.solutions[0], 1)
        ce = verify_syn(fx.instance, broken, f=1).counterexample
        rr = run_syn(fx.instance, broken, ce.crash_times)
        assert rr.outcome == "collision"

    def test_seq_missing_rules_unreachable(self):
        fx = fixture("fig1")
        r = verify_seq(fx.instance, strip_rules(fx.solutions[1], 1), f=1)
        assert r.status == "refuted"
        ce = r.counterexample
        assert ce.kind == "unreachable_goal"
        assert ce.agents == (1,)
        assert ce.schedule == []  # the initial state is already doomed

    def test_budget_zero_accepts_more(self):
        # without crashes the stripped plans are fine: nobody detours
        fx = fixture("fig1")
        assert verify_syn(fx.instance, strip_rules(fx.solutions[0], 1), f=0).ok

    def test_structurally_broken_raises(self):
        fx = fixture("fig1")
        sol = fx.solutions[0]
        plans = (sol.plans[0],)  # wrong plan count
        with pytest.raises(ValueError):
            verify_syn(fx.instance, dataclasses.replace(sol, plans=plans), f=1)


class TestFairLivelock:
    def build(self, with_shuttle):
        # A walks 0-1-2; B shuttles 1<->4 as long as it sees A on 0.
        # A scheduler that only lets A move while B parks on 1 is fair
        # but nobody ever finishes.
        g = Graph.build(6, [(0, 1), (1, 2), (0, 4), (1, 4), (4, 5), (1, 5)])
        inst = Instance(graph=g, starts=(0, 1), goals=(2, 5), f=0)
        rules = ()
        paths = ((1, 4, 5),)
        if with_shuttle:
            paths = ((1, 4, 5), (4, 1, 5))
            rules = (
                TransitionRule(from_path=0, at_index=2, watch=0, trigger=CORRECT, to_path=1),
                TransitionRule(from_path=1, at_index=2, watch=0, trigger=CORRECT, to_path=0),
            )
        sol = Solution(
            model=SEQ,
            fd=NFD,
            plans=(Plan(paths=((0, 1, 2),)), Plan(paths=paths, rules=rules)),
        )
        assert validate_instance(inst) == []
        assert validate_solution(inst, sol) == []
        return inst, sol

    def test_shuttle_livelocks(self):
        inst, sol = self.build(with_shuttle=True)
        r = verify_seq(inst, sol, f=0)
        assert r.status == "refuted"
        ce = r.counterexample
        assert ce.kind == "livelock"
        assert ce.cycle, "livelock witness must carry a cycle"
        assert {a for _, a in ce.cycle} == {0, 1}  # the cycle is fair
        assert r.states_explored == 7

    def test_without_shuttle_verifies(self):
        inst, sol = self.build(with_shuttle=False)
        assert verify_seq(inst, sol, f=0).ok

    def test_livelock_cycle_replays(self):
        inst, sol = self.build(with_shuttle=True)
        ce = verify_seq(inst, sol, f=0).counterexample
        # run prefix plus a few laps of the cycle: nobody may finish
        r = run_seq(inst, sol, list(ce.schedule) + list(ce.cycle) * 3)
        assert r.outcome == "stuck"


class TestGuards:
    def test_syn_cap(self):
        fx = fixture("fig6")
        r = verify(fx.instance, fx.solutions[0], f=1, state_cap=2)
        assert r.status == "too_large"
        assert r.counterexample is None and not r.ok

    def test_seq_cap(self):
        fx = fixture("seq_anonymous")
        r = verify(fx.instance, fx.solutions[0], f=2, state_cap=2)
        assert r.status == "too_large"

    def test_dispatcher_uses_solution_model(self):
        fx = fixture("fig1")
        assert verify(fx.instance, fx.solutions[0], f=1).ok
        assert verify(fx.instance, fx.solutions[1], f=1).ok

    def test_default_f_from_instance(self):
        fx = fixture("fig1")
        assert verify(fx.instance, fx.solutions[0]).f == 1
