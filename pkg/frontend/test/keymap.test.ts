import { describe, expect, it } from "vitest";

import { defaultKeymap, keyToAction, rebind } from "../src/keymap.js";
import type { StateUpdate } from "../src/protocol.js";

function viewHolding(held: StateUpdate["agents"][number]["held"]): StateUpdate {
  return {
    kind: "state_update",
    tick: 5,
    phase: "playing",
    agents: [{ pos: [1, 1], held }],
    stations: [],
    orders: [],
    score: 0,
  };
}

describe("keyToAction", () => {
  it("maps arrows and numpad to the 8 directions", () => {
    const map = defaultKeymap();
    expect(keyToAction(map, "ArrowUp", 0, null)).toBe("up");
    expect(keyToAction(map, "Numpad9", 0, null)).toBe("up_right");
    expect(keyToAction(map, "KeyZ", 0, null)).toBe("down_left");
  });

  it("space is pick when empty-handed and drop when holding", () => {
    const map = defaultKeymap();
    expect(keyToAction(map, "Space", 0, viewHolding(null))).toBe("pick");
    expect(
      keyToAction(map, "Space", 0, viewHolding({ kind: "raw", ingredient: "onion" })),
    ).toBe("drop");
    // Without a view yet an empty hand is assumed.
    expect(keyToAction(map, "Space", 0, null)).toBe("pick");
  });

  it("ignores unbound keys", () => {
    expect(keyToAction(defaultKeymap(), "KeyP", 0, null)).toBeNull();
  });

  it("is rebindable without mutating the original", () => {
    const base = defaultKeymap();
    const custom = rebind(base, "KeyJ", "serve");
    expect(keyToAction(custom, "KeyJ", 0, null)).toBe("serve");
    expect(keyToAction(base, "KeyJ", 0, null)).toBeNull();
  });
});
