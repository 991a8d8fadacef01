"""Run the small smoke benchmark grid and tabulate the rows.

Same entry point the `mappcf bench` command uses.  The grid config
lives in data/bench-smoke.json: one 16x16 map, two agent counts, three
seeds, both planners.  The full trend grid (data/bench-trend.json) is
the same shape with more agents and seeds; the acceptance tests run it.
"""

import json
import tempfile
from pathlib import Path

from mappcf import cli

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    config = json.loads((DATA / "bench-smoke.json").read_text())
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "smoke.csv"
        rows = cli.run_bench(config, jobs=1, out_path=out, base_dir=DATA)
        print(f"wrote {len(rows)} rows to a throwaway csv\n")

    header = f"{'instance':28} {'algo':9} {'outcome':8} {'ms':>7}  cost"
    print(header)
    print("-" * len(header))
    for r in rows:
        cost = f"{r['cost_normalized']:.3f}" if r["cost_normalized"] else "-"
        print(f"{r['instance_id']:28} {r['algo']:9} {r['outcome']:8} "
              f"{r['runtime_ms']:>7}  {cost}")

    for algo in ("dcrf", "disjoint"):
        sub = [r for r in rows if r["algo"] == algo]
        solved = sum(1 for r in sub if r["outcome"] == "solved")
        print(f"\n{algo}: solved {solved}/{len(sub)}")


if __name__ == "__main__":
    main()
