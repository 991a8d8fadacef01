"""Two agents, one shared hub: what a crash-tolerant plan looks like.

Agent 0 walks 0 -> 1 -> 2. Agent 1 wants 3 -> 4 and has two routes, through
vertex 1 or through vertex 0. If agent 0 crashes mid-way it permanently
blocks whichever vertex it died on, so agent 1 carries both routes plus
switching rules keyed on what its failure detector shows.
"""

from mappcf import fixture, run_syn, solution_cost
from mappcf.verify import verify_syn


def show(title, result):
    print(f"--- {title}")
    for line in result.trace.lines:
        print("   ", line)
    print("    outcome:", result.outcome, "in", result.steps, "rounds")
    print()


def main():
    fx = fixture("fig1")
    sol = fx.solutions[0]  # the lockstep variant
    for a, plan in enumerate(sol.plans):
        print(f"agent {a} paths: {plan.paths}")
        for r in plan.rules:
            print(f"    at path {r.from_path} step {r.at_index}: "
                  f"if {r.watch} looks {r.trigger.kind} -> path {r.to_path}")
    print()

    show("nobody crashes", run_syn(fx.instance, sol, crash_times={}))
    show("agent 0 dies on the hub (round 2)",
         run_syn(fx.instance, sol, crash_times={0: 2}))
    show("agent 0 dies at home (round 1)",
         run_syn(fx.instance, sol, crash_times={0: 1}))

    check = verify_syn(fx.instance, sol)
    print("verifier:", check.status, f"({check.states_explored} states),",
          "plan cost", solution_cost(sol))


if __name__ == "__main__":
    main()
