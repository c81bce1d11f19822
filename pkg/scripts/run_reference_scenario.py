#!/usr/bin/env python3
"""Run one seeded episode per policy on the reference 3-table scenario and
print a per-policy summary line."""

import argparse

from restaurant_pomdp.config import scenario_paper_3tables
from restaurant_pomdp.harness import run_episode, summarize
from restaurant_pomdp.planners import PolicySpec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=int, default=1000, help="mcts simulations")
    args = parser.parse_args()

    cfg = scenario_paper_3tables()
    specs = [
        PolicySpec(kind="random"),
        PolicySpec(kind="fcfs"),
        PolicySpec(kind="greedy"),
        PolicySpec(kind="mcts", budget=args.budget, max_depth=10),
    ]
    print(f"scenario: {cfg.n_tables} tables, horizon {cfg.horizon}, seed {args.seed}")
    for spec in specs:
        trace = run_episode(spec, cfg, args.seed)
        s = summarize(trace)
        print(
            f"{spec.kind:>8}: return={trace.discounted_return:10.3f} "
            f"steps={s.n_steps:3d} done={sum(s.tables_done)}/{cfg.n_tables} "
            f"final_sat={list(s.final_satisfactions)}"
        )


if __name__ == "__main__":
    main()
