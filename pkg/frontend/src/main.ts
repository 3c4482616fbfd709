// Browser entry point: join a session from the URL query, wire keyboard and
// network into the store, and redraw on every update.

import { GameConnection, sessionUrl } from "./net.js";
import { InputQueue } from "./input.js";
import { defaultKeymap, keyToAction } from "./keymap.js";
import { actionSubmit } from "./protocol.js";
import {
  applyMessage,
  initialView,
  setStatus,
  type ClientView,
} from "./store.js";
import { parseMapText, render, sizeCanvas } from "./render.js";

function requireCanvas(): HTMLCanvasElement {
  const canvas = document.getElementById("kitchen");
  if (!(canvas instanceof HTMLCanvasElement)) {
    throw new Error("missing #kitchen canvas");
  }
  return canvas;
}

export function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const seat = Number(params.get("seat") ?? "0");
  const banner = document.getElementById("banner");
  if (sessionId === null) {
    if (banner) {
      banner.textContent =
        "Create a session first: POST /sessions, then open ?session=<id>&seat=<n>";
    }
    return;
  }

  const canvas = requireCanvas();
  let view: ClientView = initialView();
  let map = parseMapText("name=empty\n###\n#0#\n###");
  const keymap = defaultKeymap();

  const redraw = () => {
    render(canvas, view, map);
    if (banner) {
      banner.textContent = view.error ?? "";
    }
  };

  const connection = new GameConnection(
    sessionUrl(window.location.origin, sessionId, seat),
    {
      onMessage: (message) => {
        view = applyMessage(view, message);
        if (message.kind === "hello" && view.mapText !== null) {
          map = parseMapText(view.mapText);
          sizeCanvas(canvas, map);
        }
        redraw();
      },
      onStatus: (status) => {
        view = setStatus(view, status);
        redraw();
      },
    },
  );

  const queue = new InputQueue((tick, action) =>
    connection.send(actionSubmit(seat, tick, action)),
  );

  window.addEventListener("keydown", (event) => {
    if (event.repeat) {
      return;
    }
    if (event.code === "Enter") {
      connection.send({ kind: "session_control", op: "start" });
      event.preventDefault();
      return;
    }
    const action = keyToAction(keymap, event.code, seat, view.latest);
    if (action !== null && view.latest !== null) {
      queue.submit(view.latest.tick, action);
      event.preventDefault();
    }
  });

  redraw();
}

boot();
