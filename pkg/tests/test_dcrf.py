"""Decoupled crash-resolution solver: events, backups, failure modes."""

import random

import pytest

from mappcf.core import (
    NFD,
    SEQ,
    SYN,
    Graph,
    Instance,
    crashed,
    validate_solution,
)
from mappcf.dcrf import Crash, SolverConfig, prune_inconsistent, solve
from mappcf.gen import fixture, grid_graph
from mappcf.verify import verify, verify_syn


class TestPruneInconsistent:
    def test_identical_assumption_coexists(self):
        a = [Crash(agent=0, vertex=1, when=2)]
        assert not prune_inconsistent(a, a, f=1)

    def test_union_over_budget(self):
        a = [Crash(agent=0, vertex=1, when=2)]
        b = [Crash(agent=1, vertex=4, when=1)]
        assert prune_inconsistent(a, b, f=1)
        assert not prune_inconsistent(a, b, f=2)

    def test_one_agent_two_wrecks(self):
        a = [Crash(agent=0, vertex=1, when=2)]
        b = [Crash(agent=0, vertex=2, when=3)]
        assert prune_inconsistent(a, b, f=2)

    def test_same_spot_different_round(self):
        a = [Crash(agent=0, vertex=1, when=2)]
        b = [Crash(agent=0, vertex=1, when=3)]
        assert prune_inconsistent(a, b, f=2)

    def test_empty_contexts_coexist(self):
        assert not prune_inconsistent([], [], f=0)


class TestTwoCorridor:
    def test_forced_paths_single_event(self):
        fx = fixture("fig1")
        res = solve(
            fx.instance,
            SolverConfig(model=SYN, fd=NFD, initial_paths=((0, 1, 2), (3, 3, 1, 4))),
        )
        assert res.status == "solved" and res.attempts == 1
        assert len(res.events) == 1
        ev = res.events[0]
        assert (ev.crash.agent, ev.crash.vertex, ev.crash.when) == (0, 1, 2)
        eff = ev.effect
        assert (eff.agent, eff.path, eff.vertex, eff.at_index, eff.when) == (1, 0, 1, 3, 3)
        plan_j = res.solution.plans[1]
        assert plan_j.paths == ((3, 3, 1, 4), (3, 0, 4))
        assert len(plan_j.rules) == 1
        r = plan_j.rules[0]
        assert (r.from_path, r.at_index, r.watch, r.to_path) == (0, 2, 1, 1)
        assert r.trigger == crashed(0)
        assert verify_syn(fx.instance, res.solution, f=1).ok

    def test_free_solve_avoids_overlap(self):
        # left alone the planner routes j around the shared corridor
        fx = fixture("fig1")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, seed=0))
        assert res.status == "solved"
        assert res.initial_paths == ((0, 1, 2), (3, 0, 4))
        plan_j = res.solution.plans[1]
        assert plan_j.paths == ((3, 0, 4), (3, 1, 4))
        assert verify_syn(fx.instance, res.solution, f=1).ok

    def test_seq_strict_disjointness_fails_here(self):
        # the corridor graph has no vertex-disjoint pair, so the seq
        # planner gives up on initial paths no matter the order
        fx = fixture("fig1")
        res = solve(fx.instance, SolverConfig(model=SEQ, fd=NFD, restarts=5, seed=0))
        assert res.status == "init_paths"
        assert res.attempts == 6
        assert res.solution is None and not res.ok


class TestThreeAgentExample:
    def test_full_event_log(self):
        fx = fixture("fig6")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, seed=0))
        assert res.status == "solved"
        assert res.initial_paths == ((0, 1, 2, 3), (1, 4), (6, 2, 5))
        log = [
            (
                e.crash.agent,
                e.crash.vertex,
                e.crash.when,
                e.effect.agent,
                e.effect.path,
                e.effect.vertex,
                e.effect.at_index,
                e.effect.when,
            )
            for e in res.events
        ]
        assert log == [
            (1, 1, 1, 0, 0, 1, 2, 2),
            (2, 2, 2, 0, 0, 2, 3, 3),
            (2, 2, 2, 0, 1, 2, 3, 3),
        ]
        assert res.solution == fx.solutions[0]

    def test_refine_off_still_solves(self):
        fx = fixture("fig6")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, refine=False))
        assert res.status == "solved"
        assert verify_syn(fx.instance, res.solution, f=1).ok


class TestIncompletenessFixture:
    def test_pinned_priority_no_backup(self):
        fx = fixture("fig8")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, priority=fx.priority))
        assert res.status == "no_backup"
        assert res.attempts == 1  # a pinned order is never reshuffled
        assert res.initial_paths == ((0, 1, 2, 3, 4), (5, 6, 0, 7), (8, 3, 9))

    def test_reference_paths_fail_after_three_events(self):
        fx = fixture("fig8")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, initial_paths=fx.initial_paths))
        assert res.status == "no_backup"
        log = [
            (
                e.crash.agent,
                e.crash.vertex,
                e.crash.when,
                e.effect.agent,
                e.effect.path,
                e.effect.vertex,
                e.effect.at_index,
                e.effect.when,
            )
            for e in res.events
        ]
        assert log == [
            (0, 1, 2, 1, 0, 1, 3, 3),
            (2, 3, 2, 0, 0, 3, 4, 4),
            (1, 1, 3, 0, 1, 1, 2, 4),
        ]


class TestFailureModes:
    def test_zero_deadline_times_out(self):
        fx = fixture("fig1")
        res = solve(fx.instance, SolverConfig(model=SYN, fd=NFD, deadline=0.0))
        assert res.status == "timeout"

    def test_invalid_instance_raises(self):
        g = Graph.build(3, [(0, 1), (1, 2)])
        inst = Instance(graph=g, starts=(0, 0), goals=(1, 2), f=1)
        with pytest.raises(ValueError):
            solve(inst, SolverConfig())


class TestDeterminismAndSoundness:
    def test_same_seed_same_solution(self):
        fx = fixture("fig6")
        cfg = SolverConfig(model=SYN, fd=NFD, seed=3)
        assert solve(fx.instance, cfg).solution == solve(fx.instance, cfg).solution

    def test_outputs_validate_strictly(self):
        # seeded sweep over small grids; every success must be a
        # structurally clean solution and survive exhaustive checking
        rng = random.Random(0)
        g = grid_graph(4, 4)
        solved = 0
        for seed in range(40):
            picks = rng.sample(range(16), 6)
            inst = Instance(graph=g, starts=tuple(picks[:3]), goals=tuple(picks[3:]), f=1)
            res = solve(inst, SolverConfig(model=SYN, fd=NFD, seed=seed, deadline=5.0))
            if res.status != "solved":
                continue
            solved += 1
            assert validate_solution(inst, res.solution, strict=True) == []
            assert verify(inst, res.solution, f=1).ok
        assert solved >= 20  # the sweep is not vacuous
