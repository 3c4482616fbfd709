import random

import pytest

from conftest import random_grid
from coopkitchen.belief import (
    ACTION_ALPHABET,
    ALPHABET_SIZE,
    action_likelihood,
    posterior_mode,
    update_posterior,
    GoalPosterior,
)
from coopkitchen.harness import EpisodeConfig, EpisodeDriver, belief_rng
from coopkitchen.pathing import optimal_first_actions
from coopkitchen.world import (
    Action,
    Kitchen,
    StationKind,
    Subtask,
    SubtaskKind,
    load_map,
    soup,
)
from oracles import bfs_first_moves, exact_posterior, total_variation
from test_pathing import grid_map_from_rows
from test_world import replace_agent, with_station_items


def corridor_kitchen():
    return Kitchen(load_map("name=beliefcorr\n#O########\n#0.1.2.3.#\n##########"))


class TestActionLikelihood:
    def test_unique_optimal_action_closed_form(self):
        kitchen = corridor_kitchen()
        state = kitchen.initial_state(1)
        state = replace_agent(state, 0, pos=(7, 1))
        g = Subtask(0, SubtaskKind.PICK, "onion")
        assert optimal_first_actions(kitchen, state, 0, g) == (Action.LEFT,)
        lik = action_likelihood(kitchen, state, 0, g, n=100, rng=random.Random(0))
        assert lik.prob(Action.LEFT) == 101 / 114
        for a in ACTION_ALPHABET:
            if a != Action.LEFT:
                assert lik.prob(a) == 1 / 114
        assert abs(sum(lik.distribution().values()) - 1.0) < 1e-9

    def test_two_way_tie_within_binomial_bounds(self):
        kitchen = Kitchen(
            load_map("name=twotie\n##########\nO0.1.2..3#\n#........#\n##########")
        )
        state = kitchen.initial_state(1)
        state = replace_agent(state, 0, pos=(6, 2))
        g = Subtask(0, SubtaskKind.PICK, "onion")
        acts = optimal_first_actions(kitchen, state, 0, g)
        assert len(acts) == 2
        lik = action_likelihood(kitchen, state, 0, g, n=100, rng=random.Random(5))
        # Counts are Binomial(100, 1/2); 99% central bounds ~ 50 +- 13.
        for a in acts:
            assert 37 <= lik.counts.get(a, 0) <= 63
            assert abs(lik.prob(a) - 51 / 114) <= 13 / 114

    def test_unreachable_goal_is_pure_smoothing(self):
        kitchen = Kitchen(load_map("name=nopot\n#O####\n#0.1.#\n#2.3.#\n######"))
        state = kitchen.initial_state(2)
        g = Subtask(0, SubtaskKind.COOK, "onion")  # no chopped piece anywhere
        lik = action_likelihood(kitchen, state, 0, g, n=100, rng=random.Random(0))
        for a in ACTION_ALPHABET:
            assert lik.prob(a) == 1 / ALPHABET_SIZE


class TestUpdatePosterior:
    def test_symmetric_candidates_split_evenly(self):
        kitchen = corridor_kitchen()
        state = kitchen.initial_state(1)
        state = replace_agent(state, 0, pos=(7, 1))
        g = Subtask(0, SubtaskKind.PICK, "onion")
        # Same candidate twice under different order ids has identical
        # likelihoods, so the posterior must split evenly.
        twin = Subtask(1, SubtaskKind.PICK, "onion")
        post = update_posterior(
            kitchen, state, 0, Action.LEFT, [g, twin], n=100, rng=random.Random(0)
        )
        assert post.probs == (0.5, 0.5)

    def test_unique_path_posterior_closed_form(self):
        from conftest import CORRIDOR_MAP

        kitchen = Kitchen(load_map(CORRIDOR_MAP))
        state = kitchen.initial_state(1)
        state = replace_agent(state, 0, pos=(4, 1))
        counter = kitchen.gmap.station_at[(5, 0)]
        state = with_station_items(state, counter.index, [soup(["onion"] * 3)])
        g_pick = Subtask(0, SubtaskKind.PICK, "onion")
        g_serve = Subtask(0, SubtaskKind.SERVE)
        acts_pick = optimal_first_actions(kitchen, state, 0, g_pick)
        acts_serve = optimal_first_actions(kitchen, state, 0, g_serve)
        assert acts_pick == (Action.LEFT,)
        assert Action.LEFT not in acts_serve
        post = update_posterior(
            kitchen, state, 0, Action.LEFT, [g_pick, g_serve],
            n=100, rng=random.Random(1),
        )
        assert post.prob(g_pick) == pytest.approx(101 / 102, abs=1e-12)
        assert posterior_mode(post) == g_pick

    def test_empty_candidates_empty_posterior(self, mini_kitchen):
        state = mini_kitchen.initial_state(2)
        post = update_posterior(mini_kitchen, state, 0, Action.STAY, [], 100, random.Random(0))
        assert not post
        assert posterior_mode(post) is None

    def test_mode_tie_resolves_to_frontier_order(self):
        g1 = Subtask(0, SubtaskKind.PICK, "onion")
        g2 = Subtask(0, SubtaskKind.CHOP, "onion")
        post = GoalPosterior((g1, g2), (0.5, 0.5))
        assert posterior_mode(post) == g1
        post = GoalPosterior((g1, g2), (0.01, 0.99))
        assert posterior_mode(post) == g2


def _random_scenarios(count, seed):
    """Small synthetic worlds with several distinguishable pick goals."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        rows, walkable = random_grid(rng, rng.randint(7, 12), rng.randint(6, 10), 0.2)
        if len(walkable) < 10:
            continue
        cells = sorted(walkable)
        # Plant 2-3 ingredient dispensers on distinct wall cells.
        wall_cells = [
            (x, y)
            for y in range(len(rows))
            for x in range(len(rows[0]))
            if rows[y][x] == "#"
            and any(
                (x + dx, y + dy) in walkable
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
            )
        ]
        ingredients = ["O", "T", "L"][: rng.randint(2, 3)]
        # Keep dispensers mutually far apart so no cell can reach two of them.
        spots: list[tuple[int, int]] = []
        for pos in rng.sample(wall_cells, len(wall_cells)):
            if all(max(abs(pos[0] - q[0]), abs(pos[1] - q[1])) > 2 for q in spots):
                spots.append(pos)
            if len(spots) == len(ingredients):
                break
        if len(spots) < len(ingredients):
            continue
        for ch, pos in zip(ingredients, spots):
            rows[pos[1]][pos[0]] = ch
        try:
            gmap = grid_map_from_rows(rows, name=f"scenario{len(out)}")
            kitchen = Kitchen(gmap, recipe=None)
        except Exception:
            continue
        from coopkitchen.world import MIXED_SOUP, ONION_SOUP

        try:
            kitchen = Kitchen(gmap, MIXED_SOUP if len(ingredients) == 3 else ONION_SOUP)
        except Exception:
            continue
        state = kitchen.initial_state(2)
        state = replace_agent(state, 0, pos=rng.choice(cells))
        candidates = kitchen.available_subtasks(state)
        picks = [g for g in candidates if g.kind == SubtaskKind.PICK]
        if len(picks) < 2:
            continue
        # The observation must discriminate: pick an action optimal for the
        # first candidate and for no other.
        from coopkitchen.pathing import UnreachableSubtaskError, optimal_first_actions

        try:
            sets = [set(optimal_first_actions(kitchen, state, 0, g)) for g in picks]
        except UnreachableSubtaskError:
            continue
        unique = sets[0] - set().union(*sets[1:])
        if not unique:
            continue
        observed = sorted(unique, key=lambda a: a.value)[0]
        out.append((kitchen, state, picks, observed))
    return out


class TestAgainstEnumerationOracle:
    def _oracle_posterior(self, kitchen, state, candidates, observed, n):
        sets = []
        for g in candidates:
            dispensers = kitchen.gmap.stations_of(StationKind.DISPENSER, g.ingredient)
            goal = {
                c for st in dispensers for c in kitchen.gmap.adjacent_walkable(st)
            }
            moves = bfs_first_moves(kitchen.gmap.walkable, state.agents[0].pos, goal)
            if not moves and state.agents[0].pos in goal:
                moves = {Action.PICK}
            sets.append(moves or None)
        return exact_posterior(sets, observed, n)

    @pytest.mark.parametrize("n,tol", [(100, 0.05), (10000, 0.01)])
    def test_total_variation_bounds(self, n, tol):
        scenarios = _random_scenarios(20, seed=123)
        assert len(scenarios) == 20
        for i, (kitchen, state, picks, observed) in enumerate(scenarios):
            rng = random.Random(1000 + i)
            post = update_posterior(kitchen, state, 0, observed, picks, n=n, rng=rng)
            want = self._oracle_posterior(kitchen, state, picks, observed, n)
            assert total_variation(post.probs, want) <= tol

    def test_normalization_and_positivity(self):
        for kitchen, state, picks, _observed in _random_scenarios(6, seed=77):
            post = update_posterior(
                kitchen, state, 0, Action.STAY, picks, n=100, rng=random.Random(0)
            )
            assert abs(sum(post.probs) - 1.0) < 1e-9
            assert all(0.0 < p < 1.0 for p in post.probs)


class TestMemorylessness:
    def test_logged_posteriors_recomputable_from_state_and_action(self):
        config = EpisodeConfig(map_name="map_a", roster=("tom", "ntom"), seed=11, horizon=60)
        driver = EpisodeDriver(config)
        snapshots = []
        while not driver.done:
            prev, observed = driver.prev_state, driver.observed
            tick = driver.state.tick
            driver.advance()
            if prev is not None:
                snapshots.append((tick, prev, observed[1], driver.minds[0].beliefs.get(1)))
        kitchen = driver.kitchen
        for tick, prev, observed, logged in snapshots:
            if logged is None:
                continue
            fresh = update_posterior(
                kitchen,
                prev,
                1,
                observed,
                kitchen.available_subtasks(prev),
                n=config.likelihood_samples,
                rng=belief_rng(config.seed, 0, 1, tick),
            )
            assert fresh.support == logged.support
            assert fresh.probs == logged.probs
