"""Shortest-path machinery over the kitchen grid.

Subtask costs follow the cost model of the planner: 1 per movement step,
0 for task actions. A subtask is realised as a short *route* of legs, e.g.
cooking while empty-handed is (walk to a chopped piece, pick) then (walk to
the pot, cook). Costs and the set of optimal first actions are computed from
per-leg distance fields over the static map; other agents are never treated
as obstacles during planning (they move), only at transition resolution.

Distance fields depend only on (map, leg goal cells), so they are cached on
the map and shared freely across agents, observers and episodes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

from .world import (
    Action,
    Item,
    Kitchen,
    MOVE_DELTAS,
    Pos,
    Station,
    StationKind,
    Subtask,
    SubtaskKind,
    WorldState,
)

INF = math.inf


class UnreachableSubtaskError(Exception):
    """Raised when an agent has no executable route to a subtask."""


@dataclass(frozen=True)
class PathQuery:
    start: Pos
    goals: frozenset[Pos]
    blocked: frozenset[Pos] = frozenset()


@dataclass(frozen=True)
class PathResult:
    cost: float  # movement steps, math.inf when unreachable
    first_actions: frozenset[Action]


@dataclass(frozen=True)
class Leg:
    goals: tuple[Pos, ...]  # walkable cells from which the action fires
    action: Action


def chebyshev(a: Pos, b: Pos) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _neighbor_table(gmap) -> dict[Pos, tuple[Pos, ...]]:
    table = gmap._field_cache.get("_neighbors")
    if table is None:
        table = {
            p: tuple(
                (p[0] + dx, p[1] + dy)
                for dx, dy in MOVE_DELTAS.values()
                if (p[0] + dx, p[1] + dy) in gmap.walkable
            )
            for p in gmap.walkable
        }
        gmap._field_cache["_neighbors"] = table
    return table


def _distance_field(
    gmap, seeds: dict[Pos, float], blocked: frozenset[Pos] = frozenset()
) -> dict[Pos, float]:
    """Multi-seed uniform-cost sweep: field[p] = min over seeds v of
    (steps p->v + seeds[v]). Exact on the 8-connected unit-cost grid."""
    nbrs = _neighbor_table(gmap)
    dist: dict[Pos, float] = {}
    buckets: list[list[Pos]] = []
    for p, c in seeds.items():
        if p in blocked or p not in gmap.walkable:
            continue
        c = int(c)
        if dist.get(p, INF) <= c:
            continue
        dist[p] = c
        while len(buckets) <= c:
            buckets.append([])
        buckets[c].append(p)
    i = 0
    while i < len(buckets):
        for p in buckets[i]:
            if dist.get(p) != i:
                continue
            nd = i + 1
            for q in nbrs[p]:
                if q in blocked:
                    continue
                if nd < dist.get(q, INF):
                    dist[q] = nd
                    while len(buckets) <= nd:
                        buckets.append([])
                    buckets[nd].append(q)
        i += 1
    return dist


def shortest_path(gmap, query: PathQuery) -> PathResult:
    """A* over the grid (Chebyshev heuristic, admissible for 8-connected
    unit-cost movement). Ties are expanded in (f, h, cell index) order so the
    cost is deterministic; the returned set contains every move starting some
    minimum-cost path."""
    goals = frozenset(g for g in query.goals if g in gmap.walkable and g not in query.blocked)
    if not goals or query.start in query.blocked or query.start not in gmap.walkable:
        return PathResult(INF, frozenset())
    cost = _astar_cost(gmap, query.start, goals, query.blocked)
    if cost is None:
        return PathResult(INF, frozenset())
    firsts = set()
    if cost > 0:
        for action, (dx, dy) in MOVE_DELTAS.items():
            q = (query.start[0] + dx, query.start[1] + dy)
            if q not in gmap.walkable or q in query.blocked:
                continue
            sub = _astar_cost(gmap, q, goals, query.blocked)
            if sub is not None and sub == cost - 1:
                firsts.add(action)
    return PathResult(cost, frozenset(firsts))


def _astar_cost(
    gmap, start: Pos, goals: frozenset[Pos], blocked: frozenset[Pos]
) -> int | None:
    nbrs = _neighbor_table(gmap)
    width = gmap.width

    def h(p: Pos) -> int:
        return min(chebyshev(p, g) for g in goals)

    start_h = h(start)
    open_heap: list[tuple[int, int, int, Pos]] = [(start_h, start_h, start[1] * width + start[0], start)]
    best: dict[Pos, int] = {start: 0}
    while open_heap:
        f, _, _, pos = heapq.heappop(open_heap)
        g = best[pos]
        if f > g + h(pos):
            continue
        if pos in goals:
            return g
        for q in nbrs[pos]:
            if q in blocked:
                continue
            ng = g + 1
            if ng < best.get(q, 1 << 30):
                best[q] = ng
                hq = h(q)
                heapq.heappush(open_heap, (ng + hq, hq, q[1] * width + q[0], q))
    return None


# -- subtask routes -----------------------------------------------------


def _adj(gmap, stations: Sequence[Station]) -> tuple[Pos, ...]:
    cells: set[Pos] = set()
    for st in stations:
        cells.update(gmap.adjacent_walkable(st))
    return tuple(sorted(cells))


def _surfaces_with(kitchen: Kitchen, state: WorldState, predicate) -> list[Station]:
    out = []
    for st in kitchen.gmap.stations:
        if st.kind in (StationKind.COUNTER, StationKind.BOARD):
            if predicate(st, state.station_items[st.index]):
                out.append(st)
    return out


def _matches(item: Item | None, kind: str, ingredient: str | None = None) -> bool:
    return (
        item is not None
        and item.kind == kind
        and (ingredient is None or item.ingredient == ingredient)
    )


def build_routes(
    kitchen: Kitchen, state: WorldState, agent: int, g: Subtask
) -> list[tuple[Leg, ...]]:
    """All candidate leg sequences completing ``g`` for this agent.

    Task actions carry no target, so every leg only keeps cells where the
    world's own resolution (most processed item wins a pick, first free
    surface takes a drop, boards with raw pieces outrank placing a held one)
    lands on what the plan wants. A route with an empty leg is infeasible and
    omitted.
    """
    gmap = kitchen.gmap
    me = state.agents[agent]
    held = me.held

    def pick_cells(stations, want) -> tuple[Pos, ...]:
        cells = set()
        for cell in _adj(gmap, stations):
            got = kitchen.pick_yield(state, cell)
            if got is None:
                continue
            st, item = got
            if want == "dispenser":
                # A matching raw piece lying in reach is as good as the
                # dispenser itself.
                if (item is None and st.ingredient == g.ingredient) or _matches(
                    item, "raw", g.ingredient
                ):
                    cells.add(cell)
            elif item is not None and want(st, item):
                cells.add(cell)
        return tuple(sorted(cells))

    def drop_leg() -> Leg | None:
        spots = _surfaces_with(kitchen, state, lambda st, items: not items)
        cells = [c for c in _adj(gmap, spots) if kitchen.drop_yield(state, c)]
        # Keep boards clear for chopping when a plain counter is in reach.
        off_board = [
            c
            for c in cells
            if kitchen.drop_yield(state, c).kind != StationKind.BOARD
        ]
        cells = off_board or cells
        return Leg(tuple(sorted(cells)), Action.DROP) if cells else None

    def with_pre(pre_drop: bool, legs: list[Leg]) -> tuple[Leg, ...] | None:
        if any(not leg.goals for leg in legs):
            return None
        if pre_drop:
            dl = drop_leg()
            if dl is None:
                return None
            return (dl, *legs)
        return tuple(legs)

    routes: list[tuple[Leg, ...] | None] = []
    order = next((o for o in state.orders if o.order_id == g.order_id), None)

    if g.kind == SubtaskKind.PICK:
        # Already holding the ingredient means this agent's pick is done;
        # fetching another would just shuttle items around.
        if not _matches(held, "raw", g.ingredient):
            sources = list(gmap.stations_of(StationKind.DISPENSER, g.ingredient))
            sources += _surfaces_with(
                kitchen, state, lambda st, items: items and _matches(items[0], "raw", g.ingredient)
            )
            routes.append(
                with_pre(held is not None, [Leg(pick_cells(sources, "dispenser"), Action.PICK)])
            )
    elif g.kind == SubtaskKind.CHOP:
        boards_with_raw = [
            st
            for st in gmap.stations_of(StationKind.BOARD)
            if state.station_items[st.index]
            and _matches(state.station_items[st.index][0], "raw", g.ingredient)
        ]
        if boards_with_raw:
            cells = tuple(
                c
                for c in _adj(gmap, boards_with_raw)
                if (got := kitchen.chop_yield(state, c, held))
                and got[0] == "board"
                and _matches(state.station_items[got[1].index][0], "raw", g.ingredient)
            )
            if cells:
                routes.append((Leg(cells, Action.CHOP),))
        free_boards = [
            st
            for st in gmap.stations_of(StationKind.BOARD)
            if not state.station_items[st.index]
        ]
        if _matches(held, "raw", g.ingredient):
            cells = tuple(
                c
                for c in _adj(gmap, free_boards)
                if (got := kitchen.chop_yield(state, c, held))
                and (
                    got[0] == "place"
                    or _matches(state.station_items[got[1].index][0], "raw", g.ingredient)
                )
            )
            routes.append(with_pre(False, [Leg(cells, Action.CHOP)]))
        else:
            # Chopping works an existing raw piece; drawing a fresh one from a
            # dispenser is the pick node's job.
            sources = _surfaces_with(
                kitchen, state, lambda st, items: items and _matches(items[0], "raw", g.ingredient)
            )
            acquire = pick_cells(
                sources, lambda st, item: _matches(item, "raw", g.ingredient)
            )
            # After the pick the board may be the one just cleared, so the
            # chop leg cannot be cell-filtered against the current contents.
            source_boards = [st for st in sources if st.kind == StationKind.BOARD]
            cells = tuple(
                sorted(set(_adj(gmap, free_boards)) | set(_adj(gmap, source_boards)))
            )
            routes.append(
                with_pre(
                    held is not None,
                    [Leg(acquire, Action.PICK), Leg(cells, Action.CHOP)],
                )
            )
    elif g.kind == SubtaskKind.COOK:
        pots = [
            st
            for st in gmap.stations_of(StationKind.POT)
            if kitchen._pot_accepts(state.station_items[st.index], g.ingredient)
        ]
        pot_cells = _adj(gmap, pots)
        if _matches(held, "chopped", g.ingredient):
            routes.append(with_pre(False, [Leg(pot_cells, Action.COOK)]))
        else:
            sources = _surfaces_with(
                kitchen,
                state,
                lambda st, items: items and _matches(items[0], "chopped", g.ingredient),
            )
            acquire = pick_cells(
                sources, lambda st, item: _matches(item, "chopped", g.ingredient)
            )
            routes.append(
                with_pre(
                    held is not None,
                    [Leg(acquire, Action.PICK), Leg(pot_cells, Action.COOK)],
                )
            )
    elif g.kind == SubtaskKind.SCOOP:
        want = order.recipe.ingredients if order else None
        pots = [
            st
            for st in gmap.stations_of(StationKind.POT)
            if state.station_items[st.index]
            and state.station_items[st.index][0].kind == "soup"
            and (want is None or state.station_items[st.index][0].contents == want)
        ]
        cells = pick_cells(
            pots,
            lambda st, item: item.kind == "soup" and (want is None or item.contents == want),
        )
        routes.append(with_pre(held is not None, [Leg(cells, Action.PICK)]))
    elif g.kind == SubtaskKind.SERVE:
        want = order.recipe.ingredients if order else None
        windows = gmap.stations_of(StationKind.WINDOW)
        window_cells = _adj(gmap, windows)
        if held is not None and held.kind == "soup" and (want is None or held.contents == want):
            routes.append(with_pre(False, [Leg(window_cells, Action.SERVE)]))
        else:
            sources = _surfaces_with(
                kitchen,
                state,
                lambda st, items: items
                and items[0].kind == "soup"
                and (want is None or items[0].contents == want),
            )
            acquire = pick_cells(
                sources,
                lambda st, item: item.kind == "soup"
                and (want is None or item.contents == want),
            )
            routes.append(
                with_pre(
                    held is not None,
                    [Leg(acquire, Action.PICK), Leg(window_cells, Action.SERVE)],
                )
            )
    return [r for r in routes if r is not None]


def _route_fields(gmap, route: tuple[Leg, ...]) -> list[dict[Pos, float]]:
    """fields[k][p] = movement steps from p to finish legs k..n; cached per
    (map, leg goal cells)."""
    key = tuple(leg.goals for leg in route)
    cached = gmap._field_cache.get(key)
    if cached is not None:
        return cached
    fields: list[dict[Pos, float]] = [dict() for _ in route]
    downstream: dict[Pos, float] | None = None
    for k in range(len(route) - 1, -1, -1):
        if downstream is None:
            seeds = {p: 0.0 for p in route[k].goals}
        else:
            seeds = {
                p: downstream[p] for p in route[k].goals if p in downstream
            }
        fields[k] = _distance_field(gmap, seeds)
        downstream = fields[k]
    gmap._field_cache[key] = fields
    return fields


def _route_cost(gmap, route: tuple[Leg, ...], start: Pos) -> float:
    fields = _route_fields(gmap, route)
    return fields[0].get(start, INF) if fields else INF


def _route_first_actions(gmap, route: tuple[Leg, ...], start: Pos) -> set[Action]:
    fields = _route_fields(gmap, route)
    f1 = fields[0]
    cost = f1.get(start, INF)
    if cost == INF:
        return set()
    out: set[Action] = set()
    if start in route[0].goals:
        rest = fields[1].get(start, INF) if len(fields) > 1 else 0
        if rest == cost:
            out.add(route[0].action)
    for action, (dx, dy) in MOVE_DELTAS.items():
        q = (start[0] + dx, start[1] + dy)
        if f1.get(q, INF) == cost - 1:
            out.add(action)
    return out


def subtask_cost(kitchen: Kitchen, state: WorldState, agent: int, g: Subtask) -> float:
    """Minimum movement steps for this agent to reach a state where ``g``'s
    task action fires, including any acquisition legs. ``math.inf`` when no
    route exists (e.g. wrong side of a split map)."""
    start = state.agents[agent].pos
    best = INF
    for route in build_routes(kitchen, state, agent, g):
        best = min(best, _route_cost(kitchen.gmap, route, start))
    return best


def optimal_first_actions(
    kitchen: Kitchen, state: WorldState, agent: int, g: Subtask
) -> tuple[Action, ...]:
    """Every action beginning some minimum-cost plan for ``g``: the moves that
    reduce the remaining cost by one, or the next task action when the agent
    is already in position. Sorted for deterministic sampling."""
    start = state.agents[agent].pos
    routes = build_routes(kitchen, state, agent, g)
    costs = [_route_cost(kitchen.gmap, r, start) for r in routes]
    best = min(costs, default=INF)
    if best == INF:
        raise UnreachableSubtaskError(f"agent {agent} cannot reach {g.key()}")
    actions: set[Action] = set()
    for route, cost in zip(routes, costs):
        if cost == best:
            actions |= _route_first_actions(kitchen.gmap, route, start)
    return tuple(sorted(actions, key=lambda a: a.value))


def detour_first_actions(
    kitchen: Kitchen, state: WorldState, agent: int, g: Subtask
) -> tuple[Action, ...]:
    """First moves of a cheapest plan for ``g`` that routes around the other
    agents' current positions. Used only when every optimal first action is
    blocked by a body; planning costs themselves stay body-blind."""
    blocked = frozenset(
        a.pos for i, a in enumerate(state.agents) if i != agent
    )
    gmap = kitchen.gmap
    start = state.agents[agent].pos
    best = INF
    actions: set[Action] = set()
    for route in build_routes(kitchen, state, agent, g):
        fields: list[dict[Pos, float]] = [dict() for _ in route]
        downstream: dict[Pos, float] | None = None
        for k in range(len(route) - 1, -1, -1):
            if downstream is None:
                seeds = {p: 0.0 for p in route[k].goals}
            else:
                seeds = {p: downstream[p] for p in route[k].goals if p in downstream}
            fields[k] = _distance_field(gmap, seeds, blocked)
            downstream = fields[k]
        cost = fields[0].get(start, INF)
        if cost > best or cost == INF:
            continue
        firsts: set[Action] = set()
        if start in route[0].goals:
            rest = fields[1].get(start, INF) if len(fields) > 1 else 0
            if rest == cost:
                firsts.add(route[0].action)
        for action, (dx, dy) in MOVE_DELTAS.items():
            q = (start[0] + dx, start[1] + dy)
            if q not in blocked and fields[0].get(q, INF) == cost - 1:
                firsts.add(action)
        if cost < best:
            best, actions = cost, firsts
        else:
            actions |= firsts
    return tuple(sorted(actions, key=lambda a: a.value))


def station_approach_actions(
    kitchen: Kitchen, state: WorldState, agent: int, g: Subtask
) -> tuple[Action, ...]:
    """Moves that close in on the subtask's own station, ignoring whether the
    prerequisite item is currently obtainable.

    This is how an agent keeps pursuing a chosen subtask whose acquire leg
    evaporated mid-walk (the piece is in a teammate's hands): it heads for the
    chop board / pot / window and waits there. Empty when already at (or cut
    off from) every station cell.
    """
    gmap = kitchen.gmap
    order = next((o for o in state.orders if o.order_id == g.order_id), None)
    if g.kind == SubtaskKind.PICK:
        stations = gmap.stations_of(StationKind.DISPENSER, g.ingredient)
    elif g.kind == SubtaskKind.CHOP:
        stations = gmap.stations_of(StationKind.BOARD)
    elif g.kind == SubtaskKind.COOK:
        stations = [
            st
            for st in gmap.stations_of(StationKind.POT)
            if kitchen._pot_accepts(state.station_items[st.index], g.ingredient)
        ] or list(gmap.stations_of(StationKind.POT))
    elif g.kind == SubtaskKind.SCOOP:
        want = order.recipe.ingredients if order else None
        stations = [
            st
            for st in gmap.stations_of(StationKind.POT)
            if not want
            or (
                state.station_items[st.index]
                and state.station_items[st.index][0].kind == "soup"
                and state.station_items[st.index][0].contents == want
            )
        ] or list(gmap.stations_of(StationKind.POT))
    else:
        stations = gmap.stations_of(StationKind.WINDOW)
    cells = _adj(gmap, stations)
    if not cells:
        return ()
    field = _route_fields(gmap, (Leg(cells, Action.STAY),))[0]
    start = state.agents[agent].pos
    here = field.get(start, INF)
    if here == INF:
        return ()
    if here > 3:
        # Approach: close in on the station.
        out = [
            action
            for action, (dx, dy) in MOVE_DELTAS.items()
            if field.get((start[0] + dx, start[1] + dy), INF) == here - 1
        ]
        return tuple(sorted(out, key=lambda a: a.value))
    # Waiting shell: circulate two-to-three cells out rather than standing
    # still. A parked crowd would wall off the access cells and starve the
    # very node it waits for; a drifting one keeps lanes opening up.
    shell = [
        action
        for action, (dx, dy) in MOVE_DELTAS.items()
        if 2 <= field.get((start[0] + dx, start[1] + dy), INF) <= 3
    ]
    return tuple(sorted(shell, key=lambda a: a.value))


def station_distance(
    kitchen: Kitchen, state: WorldState, agent: int, g: Subtask
) -> float:
    """Distance to the subtask's own station region, item availability aside
    (the waiting-spot metric for currently unexecutable nodes)."""
    gmap = kitchen.gmap
    kind_stations = {
        SubtaskKind.PICK: lambda: gmap.stations_of(StationKind.DISPENSER, g.ingredient),
        SubtaskKind.CHOP: lambda: gmap.stations_of(StationKind.BOARD),
        SubtaskKind.COOK: lambda: gmap.stations_of(StationKind.POT),
        SubtaskKind.SCOOP: lambda: gmap.stations_of(StationKind.POT),
        SubtaskKind.SERVE: lambda: gmap.stations_of(StationKind.WINDOW),
    }
    cells = _adj(gmap, kind_stations[g.kind]())
    if not cells:
        return INF
    field = _route_fields(gmap, (Leg(cells, Action.STAY),))[0]
    return field.get(state.agents[agent].pos, INF)
