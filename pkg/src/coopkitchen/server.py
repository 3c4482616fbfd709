"""Real-time session service: a human occupies one seat alongside the planner
agents over a JSON websocket protocol.

The server owns all game logic; clients render and submit key actions. Each
session drives a fixed-cadence tick loop: every period it collects the latest
human submissions (stay when silent), queries the agent seats, applies the
joint action, and broadcasts a ``state_update``. Sessions play an optional
training round before the main round, and their logs replay headlessly.
"""

from __future__ import annotations

import asyncio
import json
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .assets import MAP_NAMES, resolve_map
from .harness import EpisodeConfig, EpisodeDriver, EpisodeLog, kitchen_for
from .world import Action, StationKind, WorldState, dump_map

DEFAULT_TICK_MS = 150
DEFAULT_TRAINING_TICKS = 150
DISCONNECT_GRACE_S = 10.0

PHASES = ("lobby", "training", "playing", "finished")


@dataclass
class ServerSettings:
    maps_dir: str | None = None
    log_dir: str | None = None
    tick_ms: int = DEFAULT_TICK_MS
    training_ticks: int = DEFAULT_TRAINING_TICKS
    grace_s: float = DISCONNECT_GRACE_S
    static_dir: str | None = None  # built web client, served at /


def state_payload(kitchen, state: WorldState, phase: str) -> dict:
    return {
        "kind": "state_update",
        "tick": state.tick,
        "phase": phase,
        "agents": [
            {"pos": list(a.pos), "held": a.held.to_json() if a.held else None}
            for a in state.agents
        ],
        "stations": [
            {
                "kind": st.kind.value,
                "pos": list(st.pos),
                **({"ingredient": st.ingredient} if st.ingredient else {}),
                "items": [it.to_json() for it in state.station_items[st.index]],
            }
            for st in kitchen.gmap.stations
            if st.kind != StationKind.COUNTER or state.station_items[st.index]
        ],
        "orders": [
            {"id": o.order_id, "recipe": o.recipe.name, "age": state.tick - o.spawn_tick}
            for o in state.orders
        ],
        "score": state.score,
    }


class Session:
    def __init__(self, session_id: str, config: EpisodeConfig, settings: ServerSettings,
                 tick_ms: int, training_ticks: int):
        self.session_id = session_id
        self.config = config
        self.settings = settings
        self.tick_ms = tick_ms
        self.training_ticks = training_ticks
        self.phase = "lobby"
        self.kitchen = kitchen_for(config)
        self.driver: EpisodeDriver | None = None
        self.human_seats = [i for i, s in enumerate(config.roster) if s == "human"]
        self.connections: dict[int, WebSocket] = {}
        self.pending: dict[int, Action] = {}
        self.pending_tick: dict[int, int] = {}
        self.disconnected_at: dict[int, float] = {}
        self.logs: dict[str, EpisodeLog] = {}
        self.task: asyncio.Task | None = None

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        if self.phase != "lobby":
            return
        self._begin_phase("training" if self.training_ticks > 0 else "playing")
        self.task = asyncio.create_task(self._run())

    def restart(self) -> None:
        if self.task is not None:
            self.task.cancel()
            self.task = None
        self.phase = "lobby"
        self.driver = None
        self.pending.clear()
        self.pending_tick.clear()

    def _begin_phase(self, phase: str) -> None:
        self.phase = phase
        horizon = self.training_ticks if phase == "training" else self.config.horizon
        # The training round runs on a derived seed; the main round uses the
        # configured seed exactly so it replays headlessly.
        seed = self.config.seed if phase == "playing" else self.config.seed * 7919 + 1
        config = replace(self.config, horizon=horizon, seed=seed)
        self.driver = EpisodeDriver(config, kitchen=self.kitchen)
        self.pending.clear()
        self.pending_tick.clear()

    async def _run(self) -> None:
        period = self.tick_ms / 1000.0
        loop = asyncio.get_running_loop()
        next_due = loop.time() + period
        while self.phase in ("training", "playing"):
            delay = next_due - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            next_due += period
            if self._paused():
                next_due = loop.time() + period
                continue
            await self._tick()

    def _paused(self) -> bool:
        now = time.monotonic()
        return any(
            now - since > self.settings.grace_s
            for since in self.disconnected_at.values()
        )

    async def _tick(self) -> None:
        driver = self.driver
        if driver is None or driver.done:
            return
        tick = driver.state.tick
        humans = {}
        for seat in self.human_seats:
            if self.pending_tick.get(seat) == tick:
                humans[seat] = self.pending.pop(seat)
                self.pending_tick.pop(seat, None)
        events = driver.advance(humans)
        for event in events:
            await self._broadcast(
                {
                    "kind": "score_event",
                    "tick": event.tick,
                    "points": event.points,
                    "order_id": event.order_id,
                }
            )
        await self._broadcast(state_payload(self.kitchen, driver.state, self.phase))
        if driver.done:
            ended = self.phase
            self.logs[ended] = driver.log()
            self._persist(ended)
            if ended == "training":
                self._begin_phase("playing")
                await self._broadcast(
                    {
                        "kind": "end_of_round",
                        "phase": ended,
                        "final_score": self.logs[ended].final_score,
                    }
                )
                await self._broadcast(
                    state_payload(self.kitchen, self.driver.state, self.phase)
                )
            else:
                self.phase = "finished"
                await self._broadcast(
                    {
                        "kind": "end_of_round",
                        "phase": ended,
                        "final_score": self.logs[ended].final_score,
                    }
                )

    def _persist(self, phase: str) -> None:
        if self.settings.log_dir is None:
            return
        out = Path(self.settings.log_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.logs[phase].save(out / f"{self.session_id}_{phase}.jsonl")

    # -- wire handling -----------------------------------------------------

    def submit(self, seat: int, payload: dict) -> dict:
        try:
            action = Action(payload.get("action"))
        except ValueError:
            return {"kind": "error", "error": "unknown action symbol"}
        if self.driver is None:
            return {"kind": "error", "error": "round not started"}
        tick = payload.get("tick")
        current = self.driver.state.tick
        if tick != current:
            return {"kind": "stale", "tick": current}
        self.pending[seat] = action  # latest submission wins within the window
        self.pending_tick[seat] = tick
        return {"kind": "ack", "tick": tick}

    async def _broadcast(self, message: dict) -> None:
        dead = []
        for seat, ws in self.connections.items():
            try:
                await ws.send_json(message)
            except Exception:
                dead.append(seat)
        for seat in dead:
            self.connections.pop(seat, None)
            self.disconnected_at[seat] = time.monotonic()

    def status(self) -> dict:
        return {
            "session_id": self.session_id,
            "phase": self.phase,
            "map": self.config.map_name,
            "roster": list(self.config.roster),
            "tick": self.driver.state.tick if self.driver else None,
            "tick_ms": self.tick_ms,
            "score": self.driver.state.score if self.driver else 0,
            "human_seats": self.human_seats,
            "connected": sorted(self.connections),
        }


def create_app(settings: ServerSettings | None = None) -> FastAPI:
    settings = settings or ServerSettings()
    app = FastAPI(title="coopkitchen play server")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    app.state.settings = settings

    @app.post("/sessions")
    async def create_session(payload: dict):
        roster = tuple(payload.get("roster", ()))
        if not 2 <= len(roster) <= 4:
            raise HTTPException(400, "roster size must be between 2 and 4")
        if "human" not in roster:
            raise HTTPException(400, "no human seat; use the headless harness")
        try:
            config = EpisodeConfig(
                map_name=payload.get("map", "map_a"),
                roster=roster,
                seed=int(payload.get("seed", 0)),
                horizon=int(payload.get("horizon", 500)),
                beta=float(payload.get("beta", 0.5)),
                maps_dir=settings.maps_dir,
            )
            kitchen_for(config)  # validate the map eagerly
        except Exception as exc:
            raise HTTPException(400, f"bad session config: {exc}")
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            session_id,
            config,
            settings,
            tick_ms=int(payload.get("tick_ms", settings.tick_ms)),
            training_ticks=int(payload.get("training_ticks", settings.training_ticks)),
        )
        sessions[session_id] = session
        return {
            "session_id": session_id,
            "human_seats": session.human_seats,
            "tick_ms": session.tick_ms,
            "training_ticks": session.training_ticks,
        }

    @app.get("/maps/{name}")
    async def get_map(name: str):
        try:
            gmap = resolve_map(name, settings.maps_dir)
        except Exception:
            raise HTTPException(404, f"no map named {name!r}")
        return {"name": gmap.name, "text": dump_map(gmap)}

    @app.get("/maps")
    async def list_maps():
        return {"maps": list(MAP_NAMES)}

    @app.get("/sessions/{session_id}")
    async def session_status(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "no such session")
        return session.status()

    @app.get("/sessions/{session_id}/log", response_class=PlainTextResponse)
    async def session_log(session_id: str, phase: str = "playing"):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "no such session")
        log = session.logs.get(phase)
        if log is None:
            raise HTTPException(404, f"no finished {phase!r} round")
        return log.to_jsonl()

    @app.websocket("/sessions/{session_id}/ws")
    async def session_socket(ws: WebSocket, session_id: str, seat: int = 0):
        session = sessions.get(session_id)
        await ws.accept()
        if session is None:
            await ws.send_json({"kind": "error", "error": "no such session"})
            await ws.close()
            return
        if seat not in session.human_seats:
            await ws.send_json({"kind": "error", "error": f"seat {seat} is not a human seat"})
            await ws.close()
            return
        if seat in session.connections:
            await ws.send_json({"kind": "error", "error": "seat occupied"})
            await ws.close()
            return
        session.connections[seat] = ws
        session.disconnected_at.pop(seat, None)
        await ws.send_json(
            {
                "kind": "hello",
                "seat": seat,
                "map": dump_map(session.kitchen.gmap),
                "roster": list(session.config.roster),
                "phase": session.phase,
                "tick_ms": session.tick_ms,
            }
        )
        if session.driver is not None:
            await ws.send_json(
                state_payload(session.kitchen, session.driver.state, session.phase)
            )
        try:
            while True:
                payload = json.loads(await ws.receive_text())
                kind = payload.get("kind")
                if kind == "action_submit":
                    reply = session.submit(seat, payload)
                    await ws.send_json(reply)
                elif kind == "session_control":
                    op = payload.get("op")
                    if op == "start":
                        session.start()
                        await ws.send_json({"kind": "ack", "op": "start"})
                    elif op == "restart":
                        session.restart()
                        await ws.send_json({"kind": "ack", "op": "restart"})
                    else:
                        await ws.send_json({"kind": "error", "error": f"unknown op {op!r}"})
                else:
                    await ws.send_json({"kind": "error", "error": f"unknown kind {kind!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if session.connections.get(seat) is ws:
                session.connections.pop(seat, None)
                session.disconnected_at[seat] = time.monotonic()

    if settings.static_dir and Path(settings.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="client")

    return app


def serve(
    host: str = "127.0.0.1",
    port: int = 8000,
    maps_dir: str | None = None,
    log_dir: str | None = None,
    tick_ms: int = DEFAULT_TICK_MS,
    static_dir: str | None = None,
) -> None:  # pragma: no cover - thin uvicorn wrapper
    import uvicorn

    app = create_app(
        ServerSettings(
            maps_dir=maps_dir, log_dir=log_dir, tick_ms=tick_ms, static_dir=static_dir
        )
    )
    uvicorn.run(app, host=host, port=port)
