// Client-side view state. Renders only what the server sent: the last
// state_update wins, ticks never go backwards, and the score is always the
// server's number (no local accumulation).

import type {
  EndOfRound,
  Hello,
  ScoreEvent,
  ServerMessage,
  StateUpdate,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "closed";

export interface ClientView {
  seat: number | null;
  mapText: string | null;
  tickMs: number;
  latest: StateUpdate | null;
  lastScoreEvent: ScoreEvent | null;
  roundOver: EndOfRound | null;
  status: ConnectionStatus;
  error: string | null;
}

export function initialView(): ClientView {
  return {
    seat: null,
    mapText: null,
    tickMs: 150,
    latest: null,
    lastScoreEvent: null,
    roundOver: null,
    status: "connecting",
    error: null,
  };
}

export function applyMessage(view: ClientView, message: ServerMessage): ClientView {
  switch (message.kind) {
    case "hello": {
      const hello = message as Hello;
      return {
        ...view,
        seat: hello.seat,
        mapText: hello.map,
        tickMs: hello.tick_ms,
        error: null,
      };
    }
    case "state_update": {
      if (view.latest !== null && message.tick < view.latest.tick) {
        // A fresh round restarts at tick 0; anything else out of order is
        // a stale frame and is dropped.
        if (message.tick !== 0) {
          return view;
        }
      }
      return { ...view, latest: message, roundOver: null };
    }
    case "score_event":
      return { ...view, lastScoreEvent: message };
    case "end_of_round":
      return { ...view, roundOver: message };
    case "error":
      return { ...view, error: message.error };
    case "ack":
    case "stale":
      return view;
  }
}

export function setStatus(view: ClientView, status: ConnectionStatus): ClientView {
  return { ...view, status };
}

export function displayedScore(view: ClientView): number {
  return view.latest?.score ?? 0;
}

/** Remaining order value, for the urgency bar (base 150 decaying by 1/tick). */
export function orderValue(age: number, base = 150): number {
  return Math.max(0, base - age);
}
