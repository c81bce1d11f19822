"""Brute-force oracles shared by the unit and acceptance suites."""

from __future__ import annotations

import itertools
import math

import numpy as np

from restaurant_pomdp.belief import belief_init, belief_step, observe
from restaurant_pomdp.config import RestaurantConfig
from restaurant_pomdp.dynamics import transition_distribution
from restaurant_pomdp.joint import step_joint
from restaurant_pomdp.model import (
    TableState,
    action_sort_key,
    all_done,
    fresh_table,
    initial_joint_state,
    legal_actions,
)


def filter_vs_enumeration_worst_gap(
    cfg: RestaurantConfig, sequences: int, length: int, seed: int
) -> float:
    """Largest per-entry gap between the exact filter and a full-state oracle.

    The oracle pushes an exact distribution over complete table-state tuples
    through the same random action sequence, conditions on the simulator's
    observations, and marginalizes satisfaction per table.
    """
    prior = cfg.satisfaction_prior
    assert prior is not None
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(sequences):
        init_rng = np.random.default_rng(int(rng.integers(2**63)))
        js = initial_joint_state(cfg, init_rng)
        belief = belief_init(cfg)
        oracle: dict[tuple[TableState, ...], float] = {}
        support = [(s, p) for s, p in enumerate(prior) if p > 0]
        for combo in itertools.product(support, repeat=cfg.n_tables):
            prob = 1.0
            for _, p in combo:
                prob *= p
            oracle[tuple(fresh_table(s) for s, _ in combo)] = prob
        for _ in range(length):
            if all_done(js):
                break
            acts = sorted(legal_actions(js, cfg), key=action_sort_key)
            action = acts[int(rng.integers(len(acts)))]
            result = step_joint(js, action, cfg, rng)
            belief = belief_step(belief, action, result.duration, result.obs, cfg)

            pushed: dict[tuple[TableState, ...], float] = {}
            for tables, p in oracle.items():
                dists = [
                    transition_distribution(ts, action, result.duration, cfg, i)
                    for i, ts in enumerate(tables)
                ]
                for combo in itertools.product(*dists):
                    q = p
                    for _, pq in combo:
                        q *= pq
                    key = tuple(ns for ns, _ in combo)
                    pushed[key] = pushed.get(key, 0.0) + q
            conditioned = {
                tables: p
                for tables, p in pushed.items()
                if tuple(observe(ts) for ts in tables) == result.obs
            }
            total = math.fsum(conditioned.values())
            assert total > 0, "observation fell outside the oracle's support"
            oracle = {k: v / total for k, v in conditioned.items()}

            for i in range(cfg.n_tables):
                marginal = [0.0] * (cfg.sat_max + 1)
                for tables, p in oracle.items():
                    marginal[tables[i].satisfaction] += p
                for s in range(cfg.sat_max + 1):
                    worst = max(worst, abs(marginal[s] - belief.satisfaction[i][s]))
            js = result.next
    return worst
