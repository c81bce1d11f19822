"""Observations and the exact satisfaction filter.

Satisfaction is the single hidden variable, so the belief is an exact
categorical vector per table plus the fully observed rest of the state.
Observations are deterministic copies of the observable variables and carry
no evidence about satisfaction, which means the Bayes update reduces to the
prediction step; the conditioning step is asserted to be a no-op.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import RestaurantConfig
from .dynamics import action_duration, transition_distribution
from .model import (
    Action,
    ActionKind,
    JointState,
    RobotState,
    TableState,
    fresh_table,
)


class ObservationMismatchError(ValueError):
    """An observation disagreed with the deterministic observable prediction.

    In this domain the observable variables evolve deterministically, so any
    mismatch indicates a model/simulator bug, never noise.
    """


@dataclass(frozen=True, slots=True)
class Observation:
    """The eight observable variables of one table (satisfaction excluded)."""

    food: int
    water: int
    cooking_status: int
    current_request: int
    hand_raise: int
    t_since_served: int
    t_since_food_ready: int
    t_since_request: int


def observe(ts_next: TableState, action: Action | None = None) -> Observation:
    """Deterministic observation of a table: everything except satisfaction."""
    return Observation(
        food=ts_next.food,
        water=ts_next.water,
        cooking_status=ts_next.cooking_status,
        current_request=ts_next.current_request,
        hand_raise=ts_next.hand_raise,
        t_since_served=ts_next.t_since_served,
        t_since_food_ready=ts_next.t_since_food_ready,
        t_since_request=ts_next.t_since_request,
    )


def table_from_observation(obs: Observation, satisfaction: int) -> TableState:
    return TableState(
        satisfaction=satisfaction,
        food=obs.food,
        water=obs.water,
        cooking_status=obs.cooking_status,
        current_request=obs.current_request,
        hand_raise=obs.hand_raise,
        t_since_served=obs.t_since_served,
        t_since_food_ready=obs.t_since_food_ready,
        t_since_request=obs.t_since_request,
    )


@dataclass(frozen=True, slots=True)
class Belief:
    """Robot state, per-table observables, and per-table satisfaction vectors."""

    robot: RobotState
    observables: tuple[Observation, ...]
    satisfaction: tuple[tuple[float, ...], ...]


def belief_init(cfg: RestaurantConfig) -> Belief:
    """Initial belief: configured prior per table, fresh observable state."""
    prior = cfg.satisfaction_prior
    assert prior is not None, "config must be validated first"
    obs = observe(fresh_table(0))
    return Belief(
        robot=RobotState(*cfg.robot_start),
        observables=(obs,) * cfg.n_tables,
        satisfaction=(tuple(prior),) * cfg.n_tables,
    )


def observable_joint_state(b: Belief, clock: int = 0) -> JointState:
    """A joint state with the belief's observables; satisfaction filled with 0.

    Action legality never depends on satisfaction, so this is sufficient for
    computing legal actions from a belief.
    """
    tables = tuple(table_from_observation(o, 0) for o in b.observables)
    return JointState(robot=b.robot, tables=tables, clock=clock)


def belief_predict(b: Belief, action: Action, cfg: RestaurantConfig) -> tuple[Belief, int]:
    """Push the belief through the action's dynamics; returns (belief, duration).

    Each table's satisfaction vector is propagated through the satisfaction
    marginal of its transition distribution; the observable part advances
    deterministically and identically for every satisfaction value.
    """
    duration = action_duration(b.robot, action, cfg)
    if action.kind is ActionKind.GO_TO:
        assert action.table is not None
        robot = RobotState(*cfg.table_positions[action.table])
    else:
        robot = b.robot

    new_obs: list[Observation] = []
    new_vecs: list[tuple[float, ...]] = []
    for i, (obs, vec) in enumerate(zip(b.observables, b.satisfaction)):
        if obs.hand_raise == 0:
            new_obs.append(obs)
            new_vecs.append(vec)
            continue
        out = [0.0] * len(vec)
        predicted: Observation | None = None
        for sat, p in enumerate(vec):
            if p == 0.0:
                continue
            dist = transition_distribution(
                table_from_observation(obs, sat), action, duration, cfg, i
            )
            for ns, q in dist:
                out[ns.satisfaction] += p * q
                o = observe(ns)
                if predicted is None:
                    predicted = o
                elif predicted != o:
                    raise AssertionError(
                        "observable prediction depends on satisfaction"
                    )
        assert predicted is not None
        new_obs.append(predicted)
        new_vecs.append(tuple(out))
    return (
        Belief(robot=robot, observables=tuple(new_obs), satisfaction=tuple(new_vecs)),
        duration,
    )


def belief_step(
    b: Belief,
    action: Action,
    duration: int,
    z: tuple[Observation, ...],
    cfg: RestaurantConfig,
) -> Belief:
    """Exact filter step: predict through the dynamics, then condition on ``z``.

    The observation likelihood is an indicator on the observable variables and
    is constant in satisfaction, so conditioning must leave the satisfaction
    marginal untouched; this is asserted rather than assumed.
    """
    predicted, d = belief_predict(b, action, cfg)
    if duration != d:
        raise ValueError(f"duration {duration} does not match action duration {d}")
    if len(z) != len(predicted.observables):
        raise ObservationMismatchError(
            f"expected {len(predicted.observables)} observations, got {len(z)}"
        )
    for i, (zi, oi) in enumerate(zip(z, predicted.observables)):
        if zi != oi:
            raise ObservationMismatchError(
                f"table {i}: observed {zi}, predicted {oi}"
            )
    # Conditioning on a satisfaction-independent likelihood is the identity.
    for vec in predicted.satisfaction:
        total = sum(vec)
        assert abs(total - 1.0) < 1e-9, f"belief vector drifted: sums to {total}"
    return predicted
