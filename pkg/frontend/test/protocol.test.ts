import { describe, expect, it } from "vitest";

import {
  MOVE_ACTIONS,
  TASK_ACTIONS,
  actionSubmit,
  isActionSymbol,
  parseServerMessage,
} from "../src/protocol.js";

describe("action alphabet", () => {
  it("has 8 moves, 5 task actions and stay", () => {
    expect(MOVE_ACTIONS).toHaveLength(8);
    expect(TASK_ACTIONS).toHaveLength(5);
    expect(isActionSymbol("stay")).toBe(true);
    expect(isActionSymbol("up_left")).toBe(true);
    expect(isActionSymbol("serve")).toBe(true);
    expect(isActionSymbol("teleport")).toBe(false);
    expect(isActionSymbol(7)).toBe(false);
  });
});

describe("parseServerMessage", () => {
  it("accepts a well-formed state_update", () => {
    const message = parseServerMessage(
      JSON.stringify({
        kind: "state_update",
        tick: 3,
        phase: "playing",
        agents: [{ pos: [1, 2], held: null }],
        stations: [],
        orders: [{ id: 0, recipe: "onion_soup", age: 3 }],
        score: 0,
      }),
    );
    expect(message.kind).toBe("state_update");
    if (message.kind === "state_update") {
      expect(message.agents[0].pos).toEqual([1, 2]);
    }
  });

  it("rejects unknown kinds and malformed frames", () => {
    expect(() => parseServerMessage("not json")).toThrow(/not JSON/);
    expect(() => parseServerMessage('{"kind":"mystery"}')).toThrow(/unknown message kind/);
    expect(() => parseServerMessage('{"kind":"state_update"}')).toThrow(/malformed/);
    expect(() => parseServerMessage("42")).toThrow(/not an object/);
  });

  it("builds action submissions tagged with the displayed tick", () => {
    expect(actionSubmit(1, 17, "chop")).toEqual({
      kind: "action_submit",
      seat: 1,
      tick: 17,
      action: "chop",
    });
  });
});
