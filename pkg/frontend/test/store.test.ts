import { describe, expect, it } from "vitest";

import {
  applyMessage,
  displayedScore,
  initialView,
  orderValue,
  setStatus,
} from "../src/store.js";
import type { StateUpdate } from "../src/protocol.js";

function update(tick: number, score = 0): StateUpdate {
  return {
    kind: "state_update",
    tick,
    phase: "playing",
    agents: [],
    stations: [],
    orders: [],
    score,
  };
}

describe("client view store", () => {
  it("keeps the latest update and never rewinds the tick", () => {
    let view = initialView();
    view = applyMessage(view, update(4));
    view = applyMessage(view, update(5, 10));
    expect(view.latest?.tick).toBe(5);
    view = applyMessage(view, update(3));
    expect(view.latest?.tick).toBe(5); // stale frame dropped
    view = applyMessage(view, update(0)); // fresh round restarts at 0
    expect(view.latest?.tick).toBe(0);
  });

  it("renders only the server's score", () => {
    let view = initialView();
    expect(displayedScore(view)).toBe(0);
    view = applyMessage(view, update(1, 110));
    view = applyMessage(view, {
      kind: "score_event",
      tick: 1,
      points: 110,
      order_id: 0,
    });
    expect(displayedScore(view)).toBe(110); // no client-side accumulation
  });

  it("tracks hello, errors, round end, and connection status", () => {
    let view = initialView();
    view = applyMessage(view, {
      kind: "hello",
      seat: 1,
      map: "name=m\n###",
      roster: ["human", "tom"],
      phase: "lobby",
      tick_ms: 150,
    });
    expect(view.seat).toBe(1);
    expect(view.tickMs).toBe(150);
    view = applyMessage(view, { kind: "error", error: "seat occupied" });
    expect(view.error).toBe("seat occupied");
    view = applyMessage(view, { kind: "end_of_round", phase: "playing", final_score: 42 });
    expect(view.roundOver?.final_score).toBe(42);
    view = setStatus(view, "reconnecting");
    expect(view.status).toBe("reconnecting");
  });

  it("order urgency decays from 150 and floors at zero", () => {
    expect(orderValue(0)).toBe(150);
    expect(orderValue(50)).toBe(100);
    expect(orderValue(150)).toBe(0);
    expect(orderValue(400)).toBe(0);
  });
});
