"""Exhaustive adversarial verification of plans.

A solution is Verified only if no adversary within the crash budget can
break it. The synchronous verifier explores every choice of which agents
crash in which round (crashing already-arrived agents included: a crashed
body keeps blocking its vertex). The sequential verifier additionally hands
the adversary the scheduler and checks two failure modes: a reachable
configuration from which some correct agent can never finish, and a fair
livelock (a reachable crash-free cycle that activates every unfinished
correct agent yet never finishes one of them).

Refutations come with a concrete counterexample that replays through the
execution module.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field

from .core import SEQ, SYN, Instance, Solution, validate_solution
from .execution import (
    CORRECT_ST,
    CRASHED_ST,
    DONE_ST,
    activate_seq,
    crash_seq,
    init_states,
    step_syn,
)

DEFAULT_STATE_CAP = 10_000_000


@dataclass
class Counterexample:
    """A concrete adversary strategy that breaks the plan.

    For the synchronous model ``crash_times`` feeds straight into
    ``execution.run``. For the sequential model ``schedule`` is the action
    prefix; for livelocks ``cycle`` is a closed action sequence that can be
    repeated forever under fair scheduling.
    """

    kind: str  # "collision" | "stuck" | "unreachable_goal" | "livelock"
    agents: tuple = ()
    crash_times: "dict[int, int] | None" = None
    schedule: "list | None" = None
    cycle: "list | None" = None
    detail: str = ""


@dataclass
class VerifyResult:
    status: str  # "verified" | "refuted" | "too_large"
    model: str
    f: int
    states_explored: int = 0
    counterexample: "Counterexample | None" = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "verified"


class _TooLarge(Exception):
    pass


def _check_structure(inst: Instance, sol: Solution) -> None:
    bad = validate_solution(inst, sol, strict=False)
    if bad:
        raise ValueError("solution is not executable: " + "; ".join(bad))


def _crash_subsets(states, budget):
    candidates = [a for a, st in enumerate(states) if st.status != CRASHED_ST]
    yield frozenset()
    for k in range(1, min(budget, len(candidates)) + 1):
        for combo in itertools.combinations(candidates, k):
            yield frozenset(combo)


def verify_syn(
    inst: Instance, sol: Solution, f: "int | None" = None, state_cap: int = DEFAULT_STATE_CAP
) -> VerifyResult:
    """Exhaustively check a synchronous solution against every crash pattern.

    Explores (configuration, remaining budget) pairs depth-first. A repeat
    of a configuration at equal budget along the current chain means the
    adversary needs no further crashes to loop forever: the plan is stuck.
    """
    _check_structure(inst, sol)
    budget0 = inst.f if f is None else f
    init = init_states(inst, sol)
    memo: set = set()
    on_stack: set = set()
    choices: list = []  # (round, crash set) along the current chain

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 200_000))

    def pattern() -> dict:
        out = {}
        for t, crash_set in choices:
            for a in crash_set:
                out[a] = t
        return out

    def search(states, budget, t) -> "Counterexample | None":
        if all(st.status != CORRECT_ST for st in states):
            return None
        key = (states, budget)
        if key in memo:
            return None
        if key in on_stack:
            stuck = tuple(a for a, st in enumerate(states) if st.status == CORRECT_ST)
            return Counterexample(
                "stuck",
                agents=stuck,
                crash_times=pattern(),
                detail=f"configuration repeats at round {t} with no crashes left to spend",
            )
        if len(memo) > state_cap:
            raise _TooLarge
        on_stack.add(key)
        try:
            for crash_set in _crash_subsets(states, budget):
                nxt, coll = step_syn(inst, sol, states, crash_set)
                choices.append((t, crash_set))
                try:
                    if coll is not None:
                        return Counterexample(
                            "collision",
                            agents=coll.agents,
                            crash_times=pattern(),
                            detail=f"{coll.kind} collision at {coll.where} in round {t}",
                        )
                    ce = search(nxt, budget - len(crash_set), t + 1)
                    if ce is not None:
                        return ce
                finally:
                    choices.pop()
        finally:
            on_stack.discard(key)
        memo.add(key)
        return None

    try:
        ce = search(init, budget0, 1)
    except _TooLarge:
        return VerifyResult(
            "too_large",
            SYN,
            budget0,
            states_explored=len(memo),
            reason=f"explored more than {state_cap} configurations",
        )
    finally:
        sys.setrecursionlimit(limit)
    if ce is None:
        return VerifyResult("verified", SYN, budget0, states_explored=len(memo))
    return VerifyResult(
        "refuted", SYN, budget0, states_explored=len(memo), counterexample=ce, reason=ce.detail
    )


# --- sequential model ------------------------------------------------------


def _seq_estimate(sol: Solution, budget: int) -> int:
    est = budget + 1
    for plan in sol.plans:
        total = sum(len(p) for p in plan.paths)
        est *= 2 * total + 1
        if est > 10**18:
            break
    return est


def verify_seq(
    inst: Instance, sol: Solution, f: "int | None" = None, state_cap: int = DEFAULT_STATE_CAP
) -> VerifyResult:
    """Exhaustively check a sequential solution against scheduler + crashes.

    Builds the full reachable transition system (activations and crashes),
    then looks for (a) a reachable configuration from which some correct
    agent's goal states are unreachable, and (b) a fair livelock cycle.
    """
    _check_structure(inst, sol)
    budget0 = inst.f if f is None else f
    if _seq_estimate(sol, budget0) > state_cap:
        return VerifyResult(
            "too_large", SEQ, budget0, reason="state-count estimate exceeds the cap"
        )

    init = (init_states(inst, sol), budget0)
    index = {init: 0}
    states = [init]
    edges: list[list[tuple[int, str, int]]] = [[]]  # (dest, op, agent)
    frontier = [0]
    while frontier:
        new_frontier = []
        for si in frontier:
            cfg, budget = states[si]
            for a, st in enumerate(cfg):
                if st.status == CORRECT_ST:
                    nxt = (activate_seq(inst, sol, cfg, a), budget)
                    di = index.get(nxt)
                    if di is None:
                        di = len(states)
                        index[nxt] = di
                        states.append(nxt)
                        edges.append([])
                        new_frontier.append(di)
                        if len(states) > state_cap:
                            return VerifyResult(
                                "too_large",
                                SEQ,
                                budget0,
                                states_explored=len(states),
                                reason=f"more than {state_cap} reachable states",
                            )
                    edges[si].append((di, "activate", a))
                if st.status != CRASHED_ST and budget > 0:
                    nxt = (crash_seq(inst, sol, cfg, a), budget - 1)
                    di = index.get(nxt)
                    if di is None:
                        di = len(states)
                        index[nxt] = di
                        states.append(nxt)
                        edges.append([])
                        new_frontier.append(di)
                        if len(states) > state_cap:
                            return VerifyResult(
                                "too_large",
                                SEQ,
                                budget0,
                                states_explored=len(states),
                                reason=f"more than {state_cap} reachable states",
                            )
                    edges[si].append((di, "crash", a))
        frontier = new_frontier

    n_states = len(states)

    # (a) an unfinished correct agent that can never finish again
    rev: list[list[int]] = [[] for _ in range(n_states)]
    for si, outs in enumerate(edges):
        for di, _, _ in outs:
            rev[di].append(si)
    for x in inst.agents():
        good = [si for si, (cfg, _) in enumerate(states) if cfg[x].status == DONE_ST]
        can = [False] * n_states
        stack = list(good)
        for si in good:
            can[si] = True
        while stack:
            si = stack.pop()
            for pi in rev[si]:
                if not can[pi]:
                    can[pi] = True
                    stack.append(pi)
        for si in range(n_states):
            cfg, _ = states[si]
            if cfg[x].status == CORRECT_ST and not can[si]:
                return VerifyResult(
                    "refuted",
                    SEQ,
                    budget0,
                    states_explored=n_states,
                    counterexample=Counterexample(
                        "unreachable_goal",
                        agents=(x,),
                        schedule=_actions_to(states, edges, si),
                        detail=f"agent {x} can never finish after this prefix",
                    ),
                    reason=f"agent {x} can be cut off from its goal",
                )

    # (b) fair livelock: a crash-free cycle activating every unfinished
    # correct agent without finishing anyone
    ce = _fair_livelock(inst, states, edges)
    if ce is not None:
        return VerifyResult(
            "refuted", SEQ, budget0, states_explored=n_states, counterexample=ce, reason=ce.detail
        )
    return VerifyResult("verified", SEQ, budget0, states_explored=n_states)


def _actions_to(states, edges, target: int) -> list:
    """Shortest action prefix from the initial state to ``target`` (BFS order)."""
    from collections import deque

    parent: dict[int, tuple[int, str, int]] = {0: (-1, "", -1)}
    q = deque([0])
    while q:
        si = q.popleft()
        if si == target:
            break
        for di, op, a in edges[si]:
            if di not in parent:
                parent[di] = (si, op, a)
                q.append(di)
    out = []
    si = target
    while si != 0:
        pi, op, a = parent[si]
        out.append((op, a))
        si = pi
    out.reverse()
    return out


def _sccs(n: int, adj: "list[list[int]]") -> list[list[int]]:
    """Iterative Tarjan; returns strongly connected components."""
    idx = [0] * n
    low = [0] * n
    state = [0] * n  # 0 unvisited, 1 on stack, 2 done
    comp_stack: list[int] = []
    out: list[list[int]] = []
    counter = 1
    for root in range(n):
        if state[root]:
            continue
        work = [(root, iter(adj[root]))]
        idx[root] = low[root] = counter
        counter += 1
        state[root] = 1
        comp_stack.append(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if state[w] == 0:
                    idx[w] = low[w] = counter
                    counter += 1
                    state[w] = 1
                    comp_stack.append(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                elif state[w] == 1:
                    if idx[w] < low[v]:
                        low[v] = idx[w]
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                if low[v] < low[pv]:
                    low[pv] = low[v]
            if low[v] == idx[v]:
                comp = []
                while True:
                    w = comp_stack.pop()
                    state[w] = 2
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _fair_livelock(inst: Instance, states, edges) -> "Counterexample | None":
    n_states = len(states)
    act_adj: list[list[int]] = [[] for _ in range(n_states)]
    act_edges: list[list[tuple[int, int]]] = [[] for _ in range(n_states)]  # (dest, agent)
    for si, outs in enumerate(edges):
        for di, op, a in outs:
            if op == "activate":
                act_adj[si].append(di)
                act_edges[si].append((di, a))

    for comp in sorted(_sccs(n_states, act_adj), key=min):
        comp_set = set(comp)
        has_internal_edge = any(
            di in comp_set for si in comp for di, _ in act_edges[si]
        )
        if not has_internal_edge:
            continue
        cfg, _budget = states[comp[0]]
        pending = tuple(a for a, st in enumerate(cfg) if st.status == CORRECT_ST)
        if not pending:
            continue
        covered = {}
        for si in sorted(comp):
            for di, a in act_edges[si]:
                if di in comp_set and a not in covered:
                    covered[a] = (si, di, a)
        if not all(a in covered for a in pending):
            continue
        entry = min(comp)
        cycle = _cover_cycle(entry, comp_set, act_edges, [covered[a] for a in pending])
        return Counterexample(
            "livelock",
            agents=pending,
            schedule=_actions_to(states, edges, entry),
            cycle=cycle,
            detail=(
                "fair scheduling can repeat a crash-free cycle forever; "
                f"agents {list(pending)} are activated but never finish"
            ),
        )
    return None


def _cover_cycle(entry: int, comp: set, act_edges, must_use) -> list:
    """Closed activate-only walk from ``entry`` using every edge in must_use."""
    from collections import deque

    def walk(src: int, dst: int) -> list:
        if src == dst:
            return []
        parent = {src: None}
        q = deque([src])
        while q:
            si = q.popleft()
            for di, a in act_edges[si]:
                if di in comp and di not in parent:
                    parent[di] = (si, a)
                    if di == dst:
                        q.clear()
                        break
                    q.append(di)
        out = []
        cur = dst
        while parent[cur] is not None:
            pi, a = parent[cur]
            out.append(("activate", a))
            cur = pi
        out.reverse()
        return out

    actions: list = []
    cur = entry
    for si, di, a in must_use:
        actions += walk(cur, si)
        actions.append(("activate", a))
        cur = di
    actions += walk(cur, entry)
    return actions


def verify(inst: Instance, sol: Solution, f: "int | None" = None, state_cap: int = DEFAULT_STATE_CAP) -> VerifyResult:
    if sol.model == SYN:
        return verify_syn(inst, sol, f=f, state_cap=state_cap)
    if sol.model == SEQ:
        return verify_seq(inst, sol, f=f, state_cap=state_cap)
    raise ValueError(f"unknown model {sol.model!r}")
