"""Composition of the per-table processes into one joint model.

The tables share only the robot: executing an action on table *i* lets every
other table evolve as if under no-op for the action's duration, and the joint
reward is the sum of per-table rewards. Because at most one table (the serve
target) transitions stochastically per action, exhaustive enumeration of the
joint next-state distribution always has support size at most two.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .belief import Observation, observe
from .config import RestaurantConfig
from .dynamics import action_duration
from .model import (
    Action,
    ActionKind,
    IllegalActionError,
    JointState,
    RobotState,
    TableState,
    legal_actions,
)
from .rewards import table_transition_outcomes

DEFAULT_SUPPORT_CAP = 100_000


class SupportCapError(ValueError):
    """Exhaustive enumeration would exceed the configured support cap."""


@dataclass(frozen=True, slots=True)
class JointStepResult:
    next: JointState
    obs: tuple[Observation, ...]
    reward: float
    duration: int
    table_rewards: tuple[float, ...]


def _check_legal(js: JointState, action: Action, cfg: RestaurantConfig) -> None:
    if action not in legal_actions(js, cfg):
        raise IllegalActionError(f"{action} is not legal in the current state")


def _next_robot(js: JointState, action: Action, cfg: RestaurantConfig) -> RobotState:
    if action.kind is ActionKind.GO_TO:
        assert action.table is not None
        return RobotState(*cfg.table_positions[action.table])
    return js.robot


def step_joint(
    js: JointState, action: Action, cfg: RestaurantConfig, rng: np.random.Generator
) -> JointStepResult:
    """Execute one action on the joint state, sampling the serve outcome."""
    _check_legal(js, action, cfg)
    duration = action_duration(js.robot, action, cfg)
    robot = _next_robot(js, action, cfg)
    tables: list[TableState] = []
    rewards: list[float] = []
    for i, ts in enumerate(js.tables):
        outcomes = table_transition_outcomes(ts, action, duration, js.robot, cfg, i)
        if len(outcomes) == 1:
            ns, _, r = outcomes[0]
        else:
            u = rng.random()
            acc = 0.0
            ns, _, r = outcomes[-1]
            for state, p, rew in outcomes:
                acc += p
                if u < acc:
                    ns, r = state, rew
                    break
        tables.append(ns)
        rewards.append(r)
    next_js = JointState(robot=robot, tables=tuple(tables), clock=js.clock + duration)
    return JointStepResult(
        next=next_js,
        obs=tuple(observe(ts) for ts in tables),
        reward=float(math.fsum(rewards)),
        duration=duration,
        table_rewards=tuple(rewards),
    )


def enumerate_joint_transitions(
    js: JointState,
    action: Action,
    cfg: RestaurantConfig,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> list[tuple[JointState, float, float]]:
    """Exact joint distribution ``[(next_state, probability, reward), ...]``.

    The joint distribution is the product of the independent per-table
    distributions; probabilities sum to one.
    """
    _check_legal(js, action, cfg)
    duration = action_duration(js.robot, action, cfg)
    robot = _next_robot(js, action, cfg)
    per_table = [
        table_transition_outcomes(ts, action, duration, js.robot, cfg, i)
        for i, ts in enumerate(js.tables)
    ]
    support = 1
    for outcomes in per_table:
        support *= len(outcomes)
    if support > cap:
        raise SupportCapError(f"joint support {support} exceeds cap {cap}")
    result = []
    for combo in itertools.product(*per_table):
        prob = 1.0
        total = 0.0
        for _, p, r in combo:
            prob *= p
            total += r
        next_js = JointState(
            robot=robot,
            tables=tuple(ns for ns, _, _ in combo),
            clock=js.clock + duration,
        )
        result.append((next_js, prob, total))
    return result
