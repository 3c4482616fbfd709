"""Bayesian posterior over a teammate's current subtask, inferred from their
last observed action.

The observer simulates the teammate: for each candidate subtask it samples
the action the teammate would take (uniform over that subtask's optimal first
actions at the previous state), tallies the draws, applies add-one smoothing
over the 14-symbol action alphabet, and conditions on the action actually
observed. The prior over candidates is uniform and, by default, the filter is
memoryless: each tick conditions only on the latest action.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .pathing import UnreachableSubtaskError, optimal_first_actions
from .world import Action, Kitchen, Subtask, WorldState

ACTION_ALPHABET = tuple(Action)
ALPHABET_SIZE = len(ACTION_ALPHABET)  # 14


@dataclass(frozen=True)
class ActionLikelihood:
    """Smoothed per-action distribution P(action | subtask, state)."""

    counts: dict[Action, int]
    samples: int

    def prob(self, action: Action) -> float:
        return (self.counts.get(action, 0) + 1) / (self.samples + ALPHABET_SIZE)

    def distribution(self) -> dict[Action, float]:
        return {a: self.prob(a) for a in ACTION_ALPHABET}


@dataclass(frozen=True)
class GoalPosterior:
    """Distribution over candidate subtasks, in frontier order."""

    support: tuple[Subtask, ...]
    probs: tuple[float, ...]

    def __bool__(self) -> bool:
        return bool(self.support)

    def prob(self, g: Subtask) -> float:
        for cand, p in zip(self.support, self.probs):
            if cand == g:
                return p
        return 0.0

    def to_json(self) -> dict[str, float]:
        return {g.key(): p for g, p in zip(self.support, self.probs)}


EMPTY_POSTERIOR = GoalPosterior((), ())


def action_likelihood(
    kitchen: Kitchen,
    prev_state: WorldState,
    teammate: int,
    g: Subtask,
    n: int = 100,
    rng: random.Random | None = None,
) -> ActionLikelihood:
    """Monte-Carlo estimate of the teammate's action distribution under
    subtask ``g``: n draws uniform over the optimal first actions, plus one
    smoothing count per action symbol. An unreachable ``g`` yields the
    pure-smoothing uniform (1/14 each)."""
    rng = rng or random.Random()
    try:
        acts = optimal_first_actions(kitchen, prev_state, teammate, g)
    except UnreachableSubtaskError:
        return ActionLikelihood({}, 0)
    counts: dict[Action, int] = {}
    for _ in range(n):
        a = acts[rng.randrange(len(acts))]
        counts[a] = counts.get(a, 0) + 1
    return ActionLikelihood(counts, n)


def update_posterior(
    kitchen: Kitchen,
    prev_state: WorldState,
    teammate: int,
    observed: Action,
    candidates: Sequence[Subtask],
    n: int = 100,
    rng: random.Random | None = None,
    prior: GoalPosterior | None = None,
) -> GoalPosterior:
    """Bayes rule over the candidate subtasks given the observed action.

    ``candidates`` is the available frontier at the previous state (where the
    action was chosen). The prior is uniform unless an explicit previous
    posterior is passed (belief chaining, off by default); smoothing keeps
    every posterior entry strictly positive.
    """
    support = tuple(candidates)
    if not support:
        return EMPTY_POSTERIOR
    if prior is not None and prior.support:
        base = 1.0 / len(support)
        prior_probs = [prior.prob(g) or base for g in support]
        total = sum(prior_probs)
        prior_probs = [p / total for p in prior_probs]
    else:
        prior_probs = [1.0 / len(support)] * len(support)
    weights = []
    for g, p_g in zip(support, prior_probs):
        likelihood = action_likelihood(kitchen, prev_state, teammate, g, n, rng)
        weights.append(likelihood.prob(observed) * p_g)
    total = sum(weights)
    return GoalPosterior(support, tuple(w / total for w in weights))


def posterior_mode(posterior: GoalPosterior) -> Subtask | None:
    """Argmax candidate; ties resolve to the earliest in frontier order."""
    if not posterior.support:
        return None
    best = max(range(len(posterior.probs)), key=lambda i: (posterior.probs[i], -i))
    return posterior.support[best]
