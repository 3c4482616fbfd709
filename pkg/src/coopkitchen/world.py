"""Kitchen environment: map model, world state, actions, recipes, and the
deterministic joint transition.

Coordinates are ``(x, y)`` with ``x`` growing rightwards and ``y`` growing
downwards, matching the row order of the ASCII map files. Movement is
8-connected; task actions operate on any station within Chebyshev distance 1
of the agent (there is no facing direction).

The world is a pure value: :class:`WorldState` is immutable and every
transition goes through :meth:`Kitchen.apply_actions`, which is deterministic
given the joint action. Illegal actions are silently coerced to ``stay`` so
that scripted agents and human input travel the same code path.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Sequence

Pos = tuple[int, int]

INGREDIENTS = ("onion", "tomato", "lettuce")
_INGREDIENT_RANK = {name: i for i, name in enumerate(INGREDIENTS)}

BASE_ORDER_VALUE = 150


class Action(str, Enum):
    """The 14-symbol action alphabet: 8 moves, 5 task actions, stay."""

    UP = "up"
    UP_RIGHT = "up_right"
    RIGHT = "right"
    DOWN_RIGHT = "down_right"
    DOWN = "down"
    DOWN_LEFT = "down_left"
    LEFT = "left"
    UP_LEFT = "up_left"
    PICK = "pick"
    DROP = "drop"
    CHOP = "chop"
    COOK = "cook"
    SERVE = "serve"
    STAY = "stay"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


MOVE_DELTAS: dict[Action, Pos] = {
    Action.UP: (0, -1),
    Action.UP_RIGHT: (1, -1),
    Action.RIGHT: (1, 0),
    Action.DOWN_RIGHT: (1, 1),
    Action.DOWN: (0, 1),
    Action.DOWN_LEFT: (-1, 1),
    Action.LEFT: (-1, 0),
    Action.UP_LEFT: (-1, -1),
}

MOVEMENT_ACTIONS = tuple(MOVE_DELTAS)
TASK_ACTIONS = (Action.PICK, Action.DROP, Action.CHOP, Action.COOK, Action.SERVE)

_NEIGHBOR_DELTAS = tuple(MOVE_DELTAS.values())


class StationKind(str, Enum):
    DISPENSER = "dispenser"
    BOARD = "board"
    POT = "pot"
    WINDOW = "window"
    COUNTER = "counter"


@dataclass(frozen=True)
class Station:
    index: int
    kind: StationKind
    pos: Pos
    ingredient: str | None = None  # dispensers only


@dataclass(frozen=True)
class Item:
    """A raw or chopped ingredient, or a (plated/pot) soup."""

    kind: str  # "raw" | "chopped" | "soup"
    ingredient: str | None = None
    contents: tuple[str, ...] | None = None  # soup only, sorted

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.ingredient is not None:
            out["ingredient"] = self.ingredient
        if self.contents is not None:
            out["contents"] = list(self.contents)
        return out

    @staticmethod
    def from_json(data: Mapping) -> "Item":
        contents = data.get("contents")
        return Item(
            kind=data["kind"],
            ingredient=data.get("ingredient"),
            contents=tuple(contents) if contents is not None else None,
        )


def raw(ingredient: str) -> Item:
    return Item("raw", ingredient=ingredient)


def chopped(ingredient: str) -> Item:
    return Item("chopped", ingredient=ingredient)


def soup(ingredients: Iterable[str]) -> Item:
    return Item("soup", contents=tuple(sorted(ingredients)))


@dataclass(frozen=True)
class Recipe:
    name: str
    ingredients: tuple[str, ...]  # sorted multiset
    base_value: int = BASE_ORDER_VALUE

    def __post_init__(self) -> None:
        object.__setattr__(self, "ingredients", tuple(sorted(self.ingredients)))


ONION_SOUP = Recipe("onion_soup", ("onion", "onion", "onion"))
MIXED_SOUP = Recipe("mixed_soup", ("onion", "tomato", "lettuce"))

RECIPES = {r.name: r for r in (ONION_SOUP, MIXED_SOUP)}


def default_recipe_for_map(map_name: str) -> Recipe:
    """Map (e) runs the mixed-vegetable soup; all others the onion soup."""
    return MIXED_SOUP if map_name == "map_e" else ONION_SOUP


@dataclass(frozen=True)
class Order:
    order_id: int
    recipe: Recipe
    spawn_tick: int

    def value_at(self, serve_tick: int) -> int:
        return max(0, self.recipe.base_value - (serve_tick - self.spawn_tick))


class SubtaskKind(IntEnum):
    PICK = 0
    CHOP = 1
    COOK = 2
    SCOOP = 3
    SERVE = 4

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.name.lower()


@dataclass(frozen=True, order=True)
class Subtask:
    """One node of the recipe dependency DAG, identified by order, stage and
    ingredient. Scoop/Serve carry no ingredient."""

    order_id: int
    kind: SubtaskKind
    ingredient: str | None = None

    @property
    def sort_key(self) -> tuple:
        rank = _INGREDIENT_RANK.get(self.ingredient, -1) if self.ingredient else -1
        return (self.order_id, int(self.kind), rank)

    def key(self) -> str:
        parts = [f"o{self.order_id}", str(self.kind)]
        if self.ingredient:
            parts.append(self.ingredient)
        return ":".join(parts)

    @staticmethod
    def from_key(key: str) -> "Subtask":
        parts = key.split(":")
        order_id = int(parts[0][1:])
        kind = SubtaskKind[parts[1].upper()]
        ingredient = parts[2] if len(parts) > 2 else None
        return Subtask(order_id, kind, ingredient)


@dataclass(frozen=True)
class TaskGraph:
    """Dependency DAG instantiated for the pending orders."""

    nodes: tuple[Subtask, ...]
    edges: tuple[tuple[Subtask, Subtask], ...]

    @staticmethod
    def for_orders(orders: Sequence[Order]) -> "TaskGraph":
        nodes: list[Subtask] = []
        edges: list[tuple[Subtask, Subtask]] = []
        for order in orders:
            scoop = Subtask(order.order_id, SubtaskKind.SCOOP)
            serve = Subtask(order.order_id, SubtaskKind.SERVE)
            for ing in sorted(set(order.recipe.ingredients), key=_INGREDIENT_RANK.get):
                pick = Subtask(order.order_id, SubtaskKind.PICK, ing)
                chop = Subtask(order.order_id, SubtaskKind.CHOP, ing)
                cook = Subtask(order.order_id, SubtaskKind.COOK, ing)
                nodes += [pick, chop, cook]
                edges += [(pick, chop), (chop, cook), (cook, scoop)]
            nodes += [scoop, serve]
            edges.append((scoop, serve))
        return TaskGraph(tuple(nodes), tuple(edges))


@dataclass(frozen=True)
class AgentState:
    pos: Pos
    held: Item | None = None


@dataclass(frozen=True)
class ScoreEvent:
    tick: int
    order_id: int
    points: int


@dataclass(frozen=True)
class WorldState:
    """Full dynamic state. Station items are stored in a tuple parallel to
    ``GridMap.stations``; dispensers and windows never hold anything."""

    tick: int
    agents: tuple[AgentState, ...]
    station_items: tuple[tuple[Item, ...], ...]
    orders: tuple[Order, ...]  # pending only, oldest first
    next_order_id: int
    score: int
    pending_spawns: tuple[int, ...] = ()  # ticks at which queued orders appear

    def to_json(self) -> dict:
        return {
            "tick": self.tick,
            "agents": [
                {"pos": list(a.pos), "held": a.held.to_json() if a.held else None}
                for a in self.agents
            ],
            "stations": [[it.to_json() for it in items] for items in self.station_items],
            "orders": [
                {
                    "id": o.order_id,
                    "recipe": o.recipe.name,
                    "spawn_tick": o.spawn_tick,
                }
                for o in self.orders
            ],
            "next_order_id": self.next_order_id,
            "score": self.score,
            "pending_spawns": list(self.pending_spawns),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


class MapError(ValueError):
    pass


class MapParseError(MapError):
    def __init__(self, message: str, line: int, column: int | None = None):
        loc = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message} ({loc})")
        self.line = line
        self.column = column


class MapValidationError(MapError):
    pass


_CELL_DISPENSERS = {"O": "onion", "T": "tomato", "L": "lettuce"}
_CELL_STATIONS = {"B": StationKind.BOARD, "P": StationKind.POT, "W": StationKind.WINDOW}
MAX_TEAM_SIZE = 4


class GridMap:
    """Static kitchen layout. Instances are immutable by convention; the
    internal cache is used by the pathing module for reusable distance
    fields."""

    def __init__(
        self,
        name: str,
        width: int,
        height: int,
        walkable: frozenset[Pos],
        stations: tuple[Station, ...],
        spawn_points: tuple[Pos, ...],
    ):
        self.name = name
        self.width = width
        self.height = height
        self.walkable = walkable
        self.stations = stations
        self.spawn_points = spawn_points
        self.station_at: dict[Pos, Station] = {s.pos: s for s in stations}
        self._adjacency: dict[int, tuple[Pos, ...]] = {
            s.index: tuple(
                p for p in self._neighbors(s.pos) if p in walkable
            )
            for s in stations
        }
        self._field_cache: dict = {}
        self._validate()

    # -- geometry ------------------------------------------------------

    def in_bounds(self, pos: Pos) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def is_walkable(self, pos: Pos) -> bool:
        return pos in self.walkable

    def _neighbors(self, pos: Pos) -> Iterable[Pos]:
        x, y = pos
        for dx, dy in _NEIGHBOR_DELTAS:
            q = (x + dx, y + dy)
            if self.in_bounds(q):
                yield q

    def adjacent_walkable(self, station: Station) -> tuple[Pos, ...]:
        """Walkable cells within Chebyshev distance 1 of the station."""
        return self._adjacency[station.index]

    def regions(self) -> list[frozenset[Pos]]:
        """Connected components of the walkable cells (8-connected)."""
        seen: set[Pos] = set()
        out = []
        for start in sorted(self.walkable):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                cur = stack.pop()
                for q in self._neighbors(cur):
                    if q in self.walkable and q not in comp:
                        comp.add(q)
                        stack.append(q)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def stations_of(
        self, kind: StationKind, ingredient: str | None = None
    ) -> tuple[Station, ...]:
        return tuple(
            s
            for s in self.stations
            if s.kind == kind and (ingredient is None or s.ingredient == ingredient)
        )

    # -- validation ----------------------------------------------------

    def _validate(self) -> None:
        if len(self.spawn_points) < MAX_TEAM_SIZE:
            raise MapValidationError(
                f"map {self.name!r}: needs {MAX_TEAM_SIZE} spawn points, "
                f"found {len(self.spawn_points)}"
            )
        for sp in self.spawn_points:
            if sp not in self.walkable:
                raise MapValidationError(f"map {self.name!r}: spawn {sp} not walkable")
        reachable: set[Pos] = set()
        for region in self.regions():
            if any(sp in region for sp in self.spawn_points):
                reachable |= region
        orphan = self.walkable - reachable
        if orphan:
            raise MapValidationError(
                f"map {self.name!r}: walkable cells unreachable from any spawn: "
                f"{sorted(orphan)[:4]}"
            )
        for st in self.stations:
            if not any(p in reachable for p in self.adjacent_walkable(st)):
                raise MapValidationError(
                    f"map {self.name!r}: station unreachable: {st.kind.value} at {st.pos}"
                )


def load_map(text: str) -> GridMap:
    """Parse the ASCII map format.

    First line is ``name=<id>``; each following line is one grid row using
    ``.`` floor, ``#`` counter, ``O``/``T``/``L`` dispensers, ``B`` chop
    board, ``P`` pot, ``W`` serve window and digits ``0-3`` for spawn points.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MapParseError("empty map file", 1)
    header = lines[0].strip()
    if not header.startswith("name="):
        raise MapParseError("expected header 'name=<id>'", 1)
    name = header[len("name=") :].strip()
    if not name:
        raise MapParseError("empty map name", 1)

    rows = lines[1:]
    if not rows:
        raise MapParseError("map has no grid rows", 2)
    width = len(rows[0])
    height = len(rows)
    walkable: set[Pos] = set()
    stations: list[Station] = []
    spawns: dict[int, Pos] = {}

    for y, row in enumerate(rows):
        if len(row) != width:
            raise MapParseError(
                f"ragged row: expected width {width}, got {len(row)}", y + 2
            )
        for x, ch in enumerate(row):
            pos = (x, y)
            if ch == ".":
                walkable.add(pos)
            elif ch.isdigit():
                idx = int(ch)
                if idx >= MAX_TEAM_SIZE:
                    raise MapParseError(f"spawn digit out of range: {ch}", y + 2, x + 1)
                if idx in spawns:
                    raise MapParseError(f"duplicate spawn digit: {ch}", y + 2, x + 1)
                spawns[idx] = pos
                walkable.add(pos)
            elif ch == "#":
                stations.append(Station(len(stations), StationKind.COUNTER, pos))
            elif ch in _CELL_DISPENSERS:
                stations.append(
                    Station(
                        len(stations),
                        StationKind.DISPENSER,
                        pos,
                        ingredient=_CELL_DISPENSERS[ch],
                    )
                )
            elif ch in _CELL_STATIONS:
                stations.append(Station(len(stations), _CELL_STATIONS[ch], pos))
            else:
                raise MapParseError(f"unknown cell character {ch!r}", y + 2, x + 1)

    missing = [str(i) for i in range(MAX_TEAM_SIZE) if i not in spawns]
    if missing:
        raise MapValidationError(
            f"map {name!r}: missing spawn digits {', '.join(missing)}"
        )
    spawn_points = tuple(spawns[i] for i in range(MAX_TEAM_SIZE))

    # Plain counters buried inside wall mass have no reachable face; they are
    # inert walls, not stations.
    def has_walkable_neighbor(pos: Pos) -> bool:
        return any(
            (pos[0] + dx, pos[1] + dy) in walkable for dx, dy in _NEIGHBOR_DELTAS
        )

    kept: list[Station] = []
    for st in stations:
        if st.kind == StationKind.COUNTER and not has_walkable_neighbor(st.pos):
            continue
        kept.append(replace(st, index=len(kept)))
    return GridMap(name, width, height, frozenset(walkable), tuple(kept), spawn_points)


def dump_map(gmap: GridMap) -> str:
    """Inverse of :func:`load_map`, used by the play server to ship assets."""
    grid = [["#"] * gmap.width for _ in range(gmap.height)]
    for x, y in gmap.walkable:
        grid[y][x] = "."
    for i, sp in enumerate(gmap.spawn_points):
        grid[sp[1]][sp[0]] = str(i)
    rev_disp = {v: k for k, v in _CELL_DISPENSERS.items()}
    rev_station = {v: k for k, v in _CELL_STATIONS.items()}
    for st in gmap.stations:
        x, y = st.pos
        if st.kind == StationKind.COUNTER:
            grid[y][x] = "#"
        elif st.kind == StationKind.DISPENSER:
            grid[y][x] = rev_disp[st.ingredient]
        else:
            grid[y][x] = rev_station[st.kind]
    return "\n".join([f"name={gmap.name}"] + ["".join(row) for row in grid]) + "\n"


@dataclass(frozen=True)
class OrderSchedule:
    """Order arrival policy.

    With ``inter_arrival`` unset, the kitchen keeps up to ``max_pending``
    orders open and spawns the replacement ``respawn_delay`` ticks after a
    serve. With ``inter_arrival`` set, a fresh order arrives every that many
    ticks regardless of serves, capped at ``max_pending`` open orders.
    """

    max_pending: int = 1
    respawn_delay: int = 1
    first_tick: int = 0
    inter_arrival: int | None = None


class UnknownAgentError(KeyError):
    pass


class Kitchen:
    """Immutable rules bundle: map + recipe + order schedule.

    All state transitions and queries live here so that the world state
    itself stays a plain value.
    """

    def __init__(
        self,
        gmap: GridMap,
        recipe: Recipe | None = None,
        schedule: OrderSchedule = OrderSchedule(),
    ):
        self.gmap = gmap
        self.recipe = recipe or default_recipe_for_map(gmap.name)
        self.schedule = schedule
        for ing in set(self.recipe.ingredients):
            if not gmap.stations_of(StationKind.DISPENSER, ing):
                raise MapValidationError(
                    f"map {gmap.name!r} has no dispenser for {ing!r} "
                    f"required by recipe {self.recipe.name!r}"
                )

    # -- state construction --------------------------------------------

    def initial_state(self, n_agents: int) -> WorldState:
        if not 1 <= n_agents <= len(self.gmap.spawn_points):
            raise ValueError(f"team size {n_agents} not supported by map")
        orders: list[Order] = []
        next_id = 0
        initial = 1 if self.schedule.inter_arrival else self.schedule.max_pending
        for _ in range(initial):
            orders.append(Order(next_id, self.recipe, self.schedule.first_tick))
            next_id += 1
        return WorldState(
            tick=0,
            agents=tuple(
                AgentState(self.gmap.spawn_points[i]) for i in range(n_agents)
            ),
            station_items=tuple(() for _ in self.gmap.stations),
            orders=tuple(orders),
            next_order_id=next_id,
            score=0,
        )

    # -- station queries -----------------------------------------------

    def _adjacent_stations(self, pos: Pos) -> list[Station]:
        x, y = pos
        out = []
        for dx, dy in _NEIGHBOR_DELTAS:
            st = self.gmap.station_at.get((x + dx, y + dy))
            if st is not None:
                out.append(st)
        out.sort(key=lambda s: s.index)
        return out

    def _pot_accepts(self, contents: tuple[Item, ...], ingredient: str) -> bool:
        if any(it.kind == "soup" for it in contents):
            return False
        have = Counter(it.ingredient for it in contents)
        have[ingredient] += 1
        need = Counter(self.recipe.ingredients)
        return all(have[k] <= need[k] for k in have)

    _PICK_STAGE = {"soup": 3, "chopped": 2, "raw": 1}

    def pick_yield(self, state: WorldState, cell: Pos) -> tuple[Station, Item | None] | None:
        """What an untargeted pick from ``cell`` grabs: the most processed
        placed item in reach (lowest station index on ties), else the first
        adjacent dispenser (yield ``None`` item meaning a fresh raw unit)."""
        best_rank: tuple[int, int] | None = None
        best: tuple[Station, Item] | None = None
        for st in self._adjacent_stations(cell):
            items = state.station_items[st.index]
            candidate: Item | None = None
            if st.kind == StationKind.POT and items and items[0].kind == "soup":
                candidate = items[0]
            elif self._holds_surface(st) and items:
                candidate = items[0]
            if candidate is not None:
                rank = (-self._PICK_STAGE[candidate.kind], st.index)
                if best_rank is None or rank < best_rank:
                    best_rank, best = rank, (st, candidate)
        if best is not None:
            return best
        for st in self._adjacent_stations(cell):
            if st.kind == StationKind.DISPENSER:
                return (st, None)
        return None

    def drop_yield(self, state: WorldState, cell: Pos) -> Station | None:
        """The surface an untargeted drop from ``cell`` lands on (first empty
        counter or board by station index)."""
        for st in self._adjacent_stations(cell):
            if self._holds_surface(st) and not state.station_items[st.index]:
                return st
        return None

    def chop_yield(
        self, state: WorldState, cell: Pos, held: Item | None
    ) -> tuple[str, Station] | None:
        """What an untargeted chop from ``cell`` works on: ``("board", st)``
        chops the raw piece already on the first such board, ``("place", st)``
        lands the held raw piece on the first free board."""
        for st in self._adjacent_stations(cell):
            if st.kind != StationKind.BOARD:
                continue
            items = state.station_items[st.index]
            if items and items[0].kind == "raw":
                return ("board", st)
        if held is not None and held.kind == "raw":
            for st in self._adjacent_stations(cell):
                if st.kind == StationKind.BOARD and not state.station_items[st.index]:
                    return ("place", st)
        return None

    def _holds_surface(self, station: Station) -> bool:
        return station.kind in (StationKind.COUNTER, StationKind.BOARD)

    # -- legality -------------------------------------------------------

    def legal_actions(self, state: WorldState, agent: int) -> frozenset[Action]:
        if not 0 <= agent < len(state.agents):
            raise UnknownAgentError(agent)
        me = state.agents[agent]
        occupied = {a.pos for a in state.agents}
        legal = {Action.STAY}
        for action, (dx, dy) in MOVE_DELTAS.items():
            target = (me.pos[0] + dx, me.pos[1] + dy)
            if self.gmap.is_walkable(target) and target not in occupied:
                legal.add(action)
        adjacent = self._adjacent_stations(me.pos)
        held = me.held
        for st in adjacent:
            items = state.station_items[st.index]
            if held is None:
                if st.kind == StationKind.DISPENSER:
                    legal.add(Action.PICK)
                elif self._holds_surface(st) and items:
                    legal.add(Action.PICK)
                elif st.kind == StationKind.POT and any(
                    it.kind == "soup" for it in items
                ):
                    legal.add(Action.PICK)  # scooping the cooked soup
            else:
                if self._holds_surface(st) and not items:
                    legal.add(Action.DROP)
                if (
                    held.kind == "chopped"
                    and st.kind == StationKind.POT
                    and self._pot_accepts(items, held.ingredient)
                ):
                    legal.add(Action.COOK)
                if (
                    held.kind == "soup"
                    and st.kind == StationKind.WINDOW
                    and any(o.recipe.ingredients == held.contents for o in state.orders)
                ):
                    legal.add(Action.SERVE)
            if st.kind == StationKind.BOARD:
                if any(it.kind == "raw" for it in items):
                    legal.add(Action.CHOP)
                elif held is not None and held.kind == "raw" and not items:
                    legal.add(Action.CHOP)
        return frozenset(legal)

    # -- transition ------------------------------------------------------

    def apply_actions(
        self, state: WorldState, joint: Sequence[Action], rng=None
    ) -> tuple[WorldState, list[ScoreEvent]]:
        new_state, events, _ = self.step(state, joint, rng)
        return new_state, events

    def step(
        self, state: WorldState, joint: Sequence[Action], rng=None
    ) -> tuple[WorldState, list[ScoreEvent], tuple[Action, ...]]:
        """Like :meth:`apply_actions` but also reports the executed action per
        agent (``stay`` wherever a request was coerced)."""
        if len(joint) != len(state.agents):
            raise ValueError("joint action length must match team size")
        t = state.tick
        executed = [Action.STAY] * len(joint)
        requested = [
            a if a in self.legal_actions(state, i) else Action.STAY
            for i, a in enumerate(joint)
        ]

        # Movement: simultaneous, lower agent index wins contested cells.
        positions = [a.pos for a in state.agents]
        claimed: dict[Pos, int] = {}
        for i, action in enumerate(requested):
            if action in MOVE_DELTAS:
                dx, dy = MOVE_DELTAS[action]
                target = (positions[i][0] + dx, positions[i][1] + dy)
                if target not in claimed:
                    claimed[target] = i
        new_positions = list(positions)
        for target, winner in claimed.items():
            new_positions[winner] = target
            executed[winner] = requested[winner]

        held = [a.held for a in state.agents]
        station_items = [list(items) for items in state.station_items]
        orders = list(state.orders)
        pending_spawns = list(state.pending_spawns)
        next_order_id = state.next_order_id
        score = state.score
        events: list[ScoreEvent] = []

        # Task actions: applied atomically in agent-index order, re-validated
        # against the evolving station contents.
        for i, action in enumerate(requested):
            if action not in TASK_ACTIONS:
                continue
            pos = new_positions[i]
            adjacent = self._adjacent_stations(pos)
            done = False
            if action == Action.PICK and held[i] is None:
                # Untargeted picks take the most processed item in reach:
                # cooked pot or plated soup, then chopped, then raw, and a
                # dispenser only when nothing is placed nearby.
                interim = replace(
                    state,
                    station_items=tuple(tuple(it) for it in station_items),
                )
                got = self.pick_yield(interim, pos)
                if got is not None:
                    st, item = got
                    if item is None:
                        held[i] = raw(st.ingredient)
                    else:
                        held[i] = item
                        station_items[st.index] = []
                    done = True
            elif action == Action.DROP and held[i] is not None:
                for st in adjacent:
                    if self._holds_surface(st) and not station_items[st.index]:
                        station_items[st.index] = [held[i]]
                        held[i] = None
                        done = True
                        break
            elif action == Action.CHOP:
                interim = replace(
                    state,
                    station_items=tuple(tuple(it) for it in station_items),
                )
                got = self.chop_yield(interim, pos, held[i])
                if got is not None:
                    mode, st = got
                    if mode == "board":
                        station_items[st.index] = [
                            chopped(station_items[st.index][0].ingredient)
                        ]
                    else:
                        # The chopped piece stays on the board so either side
                        # of a shared board can take it.
                        station_items[st.index] = [chopped(held[i].ingredient)]
                        held[i] = None
                    done = True
            elif action == Action.COOK and held[i] is not None and held[i].kind == "chopped":
                for st in adjacent:
                    if st.kind != StationKind.POT:
                        continue
                    items = tuple(station_items[st.index])
                    if self._pot_accepts(items, held[i].ingredient):
                        new_items = list(items) + [held[i]]
                        held[i] = None
                        if sorted(it.ingredient for it in new_items) == list(
                            self.recipe.ingredients
                        ):
                            new_items = [soup(it.ingredient for it in new_items)]
                        station_items[st.index] = new_items
                        done = True
                        break
            elif action == Action.SERVE and held[i] is not None and held[i].kind == "soup":
                near_window = any(st.kind == StationKind.WINDOW for st in adjacent)
                if near_window:
                    for k, order in enumerate(orders):
                        if order.recipe.ingredients == held[i].contents:
                            points = order.value_at(t)
                            score += points
                            events.append(ScoreEvent(t, order.order_id, points))
                            del orders[k]
                            held[i] = None
                            pending_spawns.append(t + self.schedule.respawn_delay)
                            done = True
                            break
            if done:
                executed[i] = action

        new_tick = t + 1
        still_pending: list[int] = []
        if self.schedule.inter_arrival:
            # Timed arrivals: a new order lands every inter_arrival ticks
            # while the board has room; serves do not trigger respawns.
            pending_spawns = []
            period = self.schedule.inter_arrival
            if (new_tick - self.schedule.first_tick) % period == 0 and len(
                orders
            ) < self.schedule.max_pending:
                orders.append(Order(next_order_id, self.recipe, new_tick))
                next_order_id += 1
        else:
            for spawn_at in pending_spawns:
                if spawn_at <= new_tick and len(orders) < self.schedule.max_pending:
                    orders.append(Order(next_order_id, self.recipe, new_tick))
                    next_order_id += 1
                else:
                    still_pending.append(spawn_at)

        new_state = WorldState(
            tick=new_tick,
            agents=tuple(
                AgentState(new_positions[i], held[i]) for i in range(len(joint))
            ),
            station_items=tuple(tuple(items) for items in station_items),
            orders=tuple(orders),
            next_order_id=next_order_id,
            score=score,
            pending_spawns=tuple(still_pending),
        )
        return new_state, events, tuple(executed)

    # -- subtask availability ---------------------------------------------

    def task_graph(self, state: WorldState) -> TaskGraph:
        return TaskGraph.for_orders(state.orders)

    def available_subtasks(
        self, state: WorldState, graph: TaskGraph | None = None
    ) -> list[Subtask]:
        """The frontier: subtasks whose predecessors are satisfied and which
        are not yet complete, ordered by (order, kind, ingredient)."""
        del graph  # the DAG is fully determined by the pending orders
        return [g for g, _ in self.frontier_capacity(state)]

    def frontier_capacity(self, state: WorldState) -> list[tuple[Subtask, int]]:
        """The frontier plus each node's remaining parallel capacity: how many
        completions of that node the order still supports right now (e.g. a
        pick node with two onions still missing has capacity 2; scoop and
        serve always have capacity 1).

        Availability is derived from the physical state. Loose items (held by
        an agent or sitting on a board/counter) are allocated to pending
        orders oldest-first so that simultaneous orders never count the same
        item twice.
        """
        loose_raw: Counter = Counter()
        loose_chopped: Counter = Counter()
        loose_soups: Counter = Counter()
        for a in state.agents:
            if a.held is not None:
                self._tally(a.held, loose_raw, loose_chopped, loose_soups)
        for st in self.gmap.stations:
            if self._holds_surface(st):
                for it in state.station_items[st.index]:
                    self._tally(it, loose_raw, loose_chopped, loose_soups)

        pots = self.gmap.stations_of(StationKind.POT)
        free_pots = list(pots)
        out: list[tuple[Subtask, int]] = []
        for order in state.orders:
            need = Counter(order.recipe.ingredients)
            key = order.recipe.ingredients
            if loose_soups[key] > 0:
                loose_soups[key] -= 1
                out.append((Subtask(order.order_id, SubtaskKind.SERVE), 1))
                continue
            cooked_pot = next(
                (
                    p
                    for p in free_pots
                    if state.station_items[p.index]
                    and state.station_items[p.index][0].kind == "soup"
                    and state.station_items[p.index][0].contents == key
                ),
                None,
            )
            if cooked_pot is not None:
                free_pots.remove(cooked_pot)
                out.append((Subtask(order.order_id, SubtaskKind.SCOOP), 1))
                continue
            pot = self._claim_pot(free_pots, need, state)
            in_pot: Counter = Counter()
            if pot is not None:
                free_pots.remove(pot)
                in_pot = Counter(
                    it.ingredient for it in state.station_items[pot.index]
                )
            for ing in sorted(need, key=_INGREDIENT_RANK.get):
                remaining = need[ing] - in_pot[ing]
                if remaining <= 0:
                    continue
                use_chopped = min(remaining, loose_chopped[ing])
                loose_chopped[ing] -= use_chopped
                if use_chopped > 0 and pot is not None:
                    out.append(
                        (Subtask(order.order_id, SubtaskKind.COOK, ing), use_chopped)
                    )
                remaining -= use_chopped
                if remaining <= 0:
                    continue
                use_raw = min(remaining, loose_raw[ing])
                loose_raw[ing] -= use_raw
                if use_raw > 0:
                    out.append(
                        (Subtask(order.order_id, SubtaskKind.CHOP, ing), use_raw)
                    )
                remaining -= use_raw
                if remaining > 0 and self.gmap.stations_of(
                    StationKind.DISPENSER, ing
                ):
                    out.append((Subtask(order.order_id, SubtaskKind.PICK, ing), remaining))
        out.sort(key=lambda item: item[0].sort_key)
        return out

    @staticmethod
    def _tally(item: Item, raw_c: Counter, chop_c: Counter, soup_c: Counter) -> None:
        if item.kind == "raw":
            raw_c[item.ingredient] += 1
        elif item.kind == "chopped":
            chop_c[item.ingredient] += 1
        else:
            soup_c[item.contents] += 1

    def _claim_pot(
        self, free_pots: list[Station], need: Counter, state: WorldState
    ) -> Station | None:
        best = None
        best_fill = -1
        for p in free_pots:
            items = state.station_items[p.index]
            if any(it.kind == "soup" for it in items):
                continue
            have = Counter(it.ingredient for it in items)
            if any(have[k] > need[k] for k in have):
                continue
            if len(items) > best_fill:
                best, best_fill = p, len(items)
        return best
