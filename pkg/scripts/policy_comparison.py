#!/usr/bin/env python3
"""Compare policies over shared-seed episodes on the two-table scenario.

Writes a metrics CSV and prints mean returns with paired standard errors
against the random baseline.
"""

import argparse
import math

from restaurant_pomdp.config import scenario_two_tables
from restaurant_pomdp.harness import aggregate, append_metrics_csv, run_batch
from restaurant_pomdp.planners import parse_policy_spec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--out", default="policy_comparison.csv")
    parser.add_argument(
        "--policies",
        nargs="+",
        default=["random", "fcfs", "greedy", "mcts:budget=1000,max_depth=10"],
    )
    args = parser.parse_args()

    cfg = scenario_two_tables()
    returns = {}
    for label in args.policies:
        spec = parse_policy_spec(label)
        summaries = run_batch(spec, cfg, args.episodes, args.base_seed, args.workers)
        returns[label] = [s.discounted_return for s in summaries]
        metrics = aggregate(summaries, cfg.n_tables)
        append_metrics_csv(args.out, label, args.base_seed, metrics)
        print(f"{label}: mean={metrics.mean_return:.3f} sd={metrics.stddev_return:.3f}")

    baseline = args.policies[0]
    for label in args.policies[1:]:
        diffs = [a - b for a, b in zip(returns[label], returns[baseline])]
        mean = sum(diffs) / len(diffs)
        var = sum((d - mean) ** 2 for d in diffs) / (len(diffs) - 1)
        se = math.sqrt(var / len(diffs))
        print(f"{label} - {baseline}: paired diff={mean:.3f} se={se:.3f}")
    print(f"metrics appended to {args.out}")


if __name__ == "__main__":
    main()
