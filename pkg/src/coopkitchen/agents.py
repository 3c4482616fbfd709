"""Planner agents: the plain rational planner and its intention-aware
variant.

Both agents score the available subtasks by shaping reward minus travel cost
and draw one via a softmax, then walk a shortest path to it. A chosen subtask
is dropped only on completion, unavailability, or abandonment: if its
prerequisite item is currently in someone else's hands the agent keeps
pursuing it, drifting near the subtask's station until the piece lands or the
node resolves. The intention-aware agent additionally infers every teammate's
current subtask from their last action and abandons its own choice when a
teammate is strictly closer to the same subtask.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .belief import GoalPosterior, update_posterior
from .pathing import (
    UnreachableSubtaskError,
    detour_first_actions,
    optimal_first_actions,
    station_approach_actions,
    station_distance,
    subtask_cost,
)
from .world import MOVE_DELTAS, Action, Kitchen, Subtask, SubtaskKind, WorldState


@dataclass(frozen=True)
class InternalRewardTable:
    """Shaping rewards for prioritisation only; never added to the team
    score."""

    pick: int = 10
    chop: int = 20
    cook: int = 40
    scoop: int = 50
    serve: int = 100

    def reward(self, kind: SubtaskKind) -> int:
        return getattr(self, kind.name.lower())


DEFAULT_REWARDS = InternalRewardTable()


@dataclass(frozen=True)
class AgentParams:
    beta: float = 0.5
    tom_enabled: bool = False
    likelihood_samples: int = 100
    persist_subtask: bool = True  # re-select only on completion/unavailability
    chain_beliefs: bool = False  # carry yesterday's posterior as today's prior

    def __post_init__(self) -> None:
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")
        if self.likelihood_samples < 1:
            raise ValueError("likelihood_samples must be >= 1")


@dataclass
class AgentMind:
    """Per-agent decision state owned by one episode."""

    current: Subtask | None = None
    abandoned: set[Subtask] = field(default_factory=set)
    beliefs: dict[int, GoalPosterior] = field(default_factory=dict)


_COMPLETING_ACTION = {
    SubtaskKind.PICK: Action.PICK,
    SubtaskKind.CHOP: Action.CHOP,
    SubtaskKind.COOK: Action.COOK,
    SubtaskKind.SCOOP: Action.PICK,
    SubtaskKind.SERVE: Action.SERVE,
}


def note_execution(
    mind: AgentMind, executed: Action, state_after: WorldState, agent: int
) -> None:
    """Completion-by-me trigger: when the executed action was the current
    subtask's own completing action, the instance landed and the agent
    re-selects next tick (the node may persist for its remaining count)."""
    current = mind.current
    if current is None or executed != _COMPLETING_ACTION[current.kind]:
        return
    held = state_after.agents[agent].held
    if current.kind == SubtaskKind.PICK and not (
        held is not None and held.kind == "raw" and held.ingredient == current.ingredient
    ):
        return  # an acquire pick for some other node, not this one
    if current.kind == SubtaskKind.SCOOP and not (held is not None and held.kind == "soup"):
        return
    mind.current = None


def subtask_utilities(
    kitchen: Kitchen,
    state: WorldState,
    agent: int,
    rewards: InternalRewardTable = DEFAULT_REWARDS,
) -> dict[Subtask, float]:
    """Shaping reward minus path cost for every available, reachable
    subtask."""
    out: dict[Subtask, float] = {}
    for g in kitchen.available_subtasks(state):
        cost = subtask_cost(kitchen, state, agent, g)
        if cost != math.inf:
            out[g] = rewards.reward(g.kind) - cost
    return out


def _nearest_waitable(
    kitchen: Kitchen, state: WorldState, agent: int, frontier, abandoned
) -> Subtask | None:
    """When nothing on the frontier is currently executable for this agent
    (every prerequisite item is in someone's hands), pursue the node whose
    station is nearest and wait there rather than freezing in place."""
    best: Subtask | None = None
    best_dist = math.inf
    for g in frontier:
        if g in abandoned:
            continue
        dist = station_distance(kitchen, state, agent, g)
        if dist < best_dist:
            best, best_dist = g, dist
    return best


def choose_subtask(
    utilities: dict[Subtask, float], beta: float, rng: random.Random
) -> Subtask | None:
    """Sample a subtask with probability proportional to exp(beta * utility),
    stabilised by subtracting the maximum utility. Returns None on an empty
    table (the idle signal)."""
    if not utilities:
        return None
    items = sorted(utilities.items(), key=lambda kv: kv[0].sort_key)
    top = max(u for _, u in items)
    weights = [math.exp(beta * (u - top)) for _, u in items]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for (g, _), w in zip(items, weights):
        acc += w
        if r < acc:
            return g
    return items[-1][0]


def _refresh_current(
    kitchen: Kitchen, state: WorldState, agent: int, mind: AgentMind
) -> None:
    """Drop the current subtask only on the re-selection triggers: completion
    or unavailability. A node that merely became unreachable (its prerequisite
    item is in someone's hands) stays chosen; the agent keeps heading for the
    station."""
    if mind.current is None:
        return
    held = state.agents[agent].held
    if (
        mind.current.kind == SubtaskKind.PICK
        and held is not None
        and held.kind == "raw"
        and held.ingredient == mind.current.ingredient
    ):
        # This agent's own pick instance just landed (the node may persist
        # for the remaining count): a completion, so re-select.
        mind.current = None
        return
    frontier = kitchen.available_subtasks(state)
    if mind.current not in frontier:
        # With several identical pending orders the census may re-label the
        # same physical work under another order id; adopt it rather than
        # treating the subtask as gone.
        twin = next(
            (
                g
                for g in frontier
                if g.kind == mind.current.kind
                and g.ingredient == mind.current.ingredient
            ),
            None,
        )
        mind.current = twin


def _emit(
    kitchen: Kitchen, state: WorldState, agent: int, mind: AgentMind, rng: random.Random
) -> Action:
    if mind.current is None:
        return Action.STAY
    try:
        acts = optimal_first_actions(kitchen, state, agent, mind.current)
    except UnreachableSubtaskError:
        # Keep chasing: walk to the subtask's station and wait nearby for the
        # prerequisites to land (or for the node to complete under us).
        return _wait_near_station(kitchen, state, agent, mind.current, rng)
    choice = acts[rng.randrange(len(acts))]
    # Planning ignores other agents' bodies; resolve jams here instead of
    # letting a move into an occupied cell coerce to stay forever.
    occupied = {a.pos for i, a in enumerate(state.agents) if i != agent}
    if not _blocked(state, agent, choice, occupied):
        return choice
    free = [a for a in acts if not _blocked(state, agent, a, occupied)]
    if free:
        return free[rng.randrange(len(free))]
    detour = detour_first_actions(kitchen, state, agent, mind.current)
    if detour:
        return detour[rng.randrange(len(detour))]
    me = state.agents[agent].pos
    sidesteps = [
        a
        for a, (dx, dy) in MOVE_DELTAS.items()
        if kitchen.gmap.is_walkable((me[0] + dx, me[1] + dy))
        and (me[0] + dx, me[1] + dy) not in occupied
    ]
    if not sidesteps:
        return Action.STAY
    return sidesteps[rng.randrange(len(sidesteps))]


def _blocked(state: WorldState, agent: int, action: Action, occupied) -> bool:
    if action not in MOVE_DELTAS:
        return False
    dx, dy = MOVE_DELTAS[action]
    me = state.agents[agent].pos
    return (me[0] + dx, me[1] + dy) in occupied


def _wait_near_station(
    kitchen: Kitchen,
    state: WorldState,
    agent: int,
    g: Subtask,
    rng: random.Random,
) -> Action:
    """Waiting etiquette while a subtask's prerequisite is in transit: drift
    in the station's outer shell, and always make way for a loaded teammate
    (the one bringing the missing piece)."""
    occupied = {a.pos for j, a in enumerate(state.agents) if j != agent}
    acts = station_approach_actions(kitchen, state, agent, g)
    open_moves = [a for a in acts if not _blocked(state, agent, a, occupied)]
    if not open_moves:
        return Action.STAY
    return open_moves[rng.randrange(len(open_moves))]


def ntom_step(
    kitchen: Kitchen,
    state: WorldState,
    agent: int,
    mind: AgentMind,
    params: AgentParams,
    rng: random.Random,
) -> Action:
    """One decision tick for the plain planner: keep (or re-pick) a subtask,
    then take one optimal first action towards it."""
    _refresh_current(kitchen, state, agent, mind)
    if not params.persist_subtask:
        mind.current = None
    if mind.current is None:
        mind.current = choose_subtask(
            subtask_utilities(kitchen, state, agent), params.beta, rng
        )
        if mind.current is None:
            mind.current = _nearest_waitable(
                kitchen, state, agent, kitchen.available_subtasks(state), ()
            )
    return _emit(kitchen, state, agent, mind, rng)


def _task_key(g: Subtask) -> tuple[SubtaskKind, str | None]:
    return (g.kind, g.ingredient)


def _inferred_task(posterior: GoalPosterior) -> tuple[SubtaskKind, str | None] | None:
    """The physical task (kind, ingredient) the teammate most likely pursues.

    With several identical pending orders the frontier can carry twin nodes
    for the same physical work under different order ids; their probability
    mass is pooled so the bookkeeping split does not dilute the argmax. With
    a single pending order this is exactly the posterior mode.
    """
    if not posterior.support:
        return None
    mass: dict[tuple, float] = {}
    order: list[tuple] = []
    for g, p in zip(posterior.support, posterior.probs):
        key = _task_key(g)
        if key not in mass:
            mass[key] = 0.0
            order.append(key)
        mass[key] += p
    return max(order, key=lambda k: (mass[k], -order.index(k)))


def coordination_filter(
    kitchen: Kitchen,
    state: WorldState,
    agent: int,
    chosen: Subtask,
    beliefs: dict[int, GoalPosterior],
) -> bool:
    """True to keep ``chosen``; False when a teammate is inferred to pursue
    the same subtask and is strictly closer (they have it covered).

    A task only admits a conflict once it is down to a single remaining
    instance: while e.g. two more onions still need picking, two agents on
    that pick node are parallel labour, not redundancy.
    """
    key = _task_key(chosen)
    rivals = [
        mate for mate, posterior in beliefs.items() if _inferred_task(posterior) == key
    ]
    if not rivals:
        return True
    capacity = sum(
        cap for g, cap in kitchen.frontier_capacity(state) if _task_key(g) == key
    )
    if capacity > 1:
        return True
    my_cost = subtask_cost(kitchen, state, agent, chosen)
    for mate in rivals:
        if subtask_cost(kitchen, state, mate, chosen) < my_cost:
            return False
    return True


def tom_step(
    kitchen: Kitchen,
    state: WorldState,
    prev_state: WorldState | None,
    observed_actions: dict[int, Action] | None,
    agent: int,
    mind: AgentMind,
    params: AgentParams,
    rng: random.Random,
    belief_rngs: dict[int, random.Random],
) -> Action:
    """One decision tick for the intention-aware planner: update the posterior
    over every teammate's subtask from their last action, yield the current
    subtask when a closer teammate has it in mind, then act like the plain
    planner."""
    if prev_state is not None and observed_actions:
        candidates = kitchen.available_subtasks(prev_state)
        for mate, observed in observed_actions.items():
            if mate == agent:
                continue
            prior = mind.beliefs.get(mate) if params.chain_beliefs else None
            mind.beliefs[mate] = update_posterior(
                kitchen,
                prev_state,
                mate,
                observed,
                candidates,
                params.likelihood_samples,
                belief_rngs[mate],
                prior=prior,
            )

    _refresh_current(kitchen, state, agent, mind)
    if not params.persist_subtask:
        mind.current = None
    mind.abandoned.clear()
    while True:
        if mind.current is None:
            utilities = {
                g: u
                for g, u in subtask_utilities(kitchen, state, agent).items()
                if g not in mind.abandoned
            }
            mind.current = choose_subtask(utilities, params.beta, rng)
            if mind.current is None:
                mind.current = _nearest_waitable(
                    kitchen, state, agent,
                    kitchen.available_subtasks(state), mind.abandoned,
                )
            if mind.current is None:
                return Action.STAY  # frontier exhausted: idle this tick
        if coordination_filter(kitchen, state, agent, mind.current, mind.beliefs):
            break
        mind.abandoned.add(mind.current)
        mind.current = None
    return _emit(kitchen, state, agent, mind, rng)
