// Keyboard bindings: 8 directions on arrows (diagonals via numpad or
// vi-style corners), task actions on space (context pick/drop) plus dedicated
// chop/cook/serve keys. Fully rebindable through `rebind`.

import type { ActionSymbol, StateUpdate } from "./protocol.js";

export type BindableAction = Exclude<ActionSymbol, "stay"> | "pick_or_drop";

export type Keymap = Map<string, BindableAction>;

export function defaultKeymap(): Keymap {
  return new Map<string, BindableAction>([
    ["ArrowUp", "up"],
    ["ArrowRight", "right"],
    ["ArrowDown", "down"],
    ["ArrowLeft", "left"],
    // Numpad, pointing the way the keys are laid out.
    ["Numpad8", "up"],
    ["Numpad9", "up_right"],
    ["Numpad6", "right"],
    ["Numpad3", "down_right"],
    ["Numpad2", "down"],
    ["Numpad1", "down_left"],
    ["Numpad4", "left"],
    ["Numpad7", "up_left"],
    // Diagonal cluster for keyboards without a numpad.
    ["KeyQ", "up_left"],
    ["KeyE", "up_right"],
    ["KeyZ", "down_left"],
    ["KeyC", "down_right"],
    ["Space", "pick_or_drop"],
    ["KeyX", "chop"],
    ["KeyV", "cook"],
    ["KeyB", "serve"],
  ]);
}

export function rebind(map: Keymap, code: string, action: BindableAction): Keymap {
  const next = new Map(map);
  next.set(code, action);
  return next;
}

/** Resolve a key code against the bound table and the current view: space is
 * context-sensitive (pick when empty-handed, drop otherwise). Unbound keys
 * resolve to null and are ignored. */
export function keyToAction(
  map: Keymap,
  code: string,
  seat: number,
  view: StateUpdate | null,
): ActionSymbol | null {
  const bound = map.get(code);
  if (bound === undefined) {
    return null;
  }
  if (bound !== "pick_or_drop") {
    return bound;
  }
  const holding = view?.agents[seat]?.held ?? null;
  return holding === null ? "pick" : "drop";
}
