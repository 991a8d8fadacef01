"""Two boundaries in one demo: timing and crash identities.

Part 1: an instance that works in the synchronous model but not in the
sequential one.  Synchronous agents share a clock, so one agent can
wait out the other and dodge based on when a crash shows up.  Under a
fair-but-adversarial scheduler there is no clock to lean on, and the
verifier finds the losing schedule for a perfectly reasonable plan.

Part 2: plans whose triggers name the crashed agent ("agent 2 is down")
can break when the detector only reports "someone is down here".
"""

import dataclasses

from mappcf import AFD, CRASHED_ANON, crashed, fixture
from mappcf.core import Plan, Solution, TransitionRule, NFD, SEQ
from mappcf.verify import verify_seq, verify_syn


def show(chk):
    print(f"    -> {chk.status}", end="")
    ce = chk.counterexample
    if ce is None:
        print()
        return
    print(f" ({ce.kind}, agents {ce.agents})")
    if ce.schedule:
        steps = ", ".join(f"{what} {who}" for what, who in ce.schedule)
        print(f"       losing schedule: {steps}")
    print(f"       {ce.detail}")


def main():
    fx = fixture("fig3")
    inst = fx.instance
    print("part 1: timing")
    print(f"instance: starts {inst.starts}, goals {inst.goals}, f={inst.f}")
    print("synchronous plan from the fixture (agent 1 waits two rounds):")
    show(verify_syn(inst, fx.solutions[0]))

    # The obvious sequential translation: walk straight, dodge to the
    # other middle vertex if the corridor partner is seen crashed.
    attempt = Solution(
        model=SEQ, fd=NFD,
        plans=(
            Plan(paths=((0, 1, 2, 3),)),
            Plan(paths=((4, 1, 5), (4, 2, 5)),
                 rules=(TransitionRule(0, 1, 1, crashed(0), 1),)),
        ),
    )
    print("hand-written sequential attempt:")
    show(verify_seq(inst, attempt))
    print("agent 1 steps onto the corridor and dies there; agent 0 has no")
    print("rules and no other way through.  No sequential plan fixes this:")
    print("every route for agent 1 crosses one of agent 0's two cut")
    print("vertices, and a crash on either one walls agent 0 in.")

    print("\npart 2: crash identities")
    fx2 = fixture("seq_anonymous")
    sol = fx2.solutions[0]
    print(f"instance: starts {fx2.instance.starts}, goals {fx2.instance.goals}, "
          f"f={fx2.instance.f}")
    print("plans whose triggers name the crashed agent:")
    show(verify_seq(fx2.instance, sol))

    def anonymize(plan):
        rules = tuple(
            dataclasses.replace(r, trigger=CRASHED_ANON) for r in plan.rules
        )
        return dataclasses.replace(plan, rules=rules)

    anon = dataclasses.replace(
        sol, fd=AFD, plans=tuple(anonymize(p) for p in sol.plans)
    )
    print("same plans with every trigger blurred to 'someone crashed':")
    show(verify_seq(fx2.instance, anon))
    print("the named plans dodge through the crashed agent's own goal,")
    print("which is guaranteed vacant.  with f=2 the anonymous report")
    print("cannot say which agent is down, so agent 0 picks the dodge")
    print("meant for the other crash and gets stuck behind the second one.")


if __name__ == "__main__":
    main()
