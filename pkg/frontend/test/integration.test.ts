// End-to-end test against the real play server: needs the python package on
// the host, so it only runs with COOPKITCHEN_INTEGRATION=1.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";
import WebSocket from "ws";

import { GameConnection, sessionUrl, type SocketLike } from "../src/net.js";
import { actionSubmit, type ServerMessage } from "../src/protocol.js";
import { applyMessage, initialView, type ClientView } from "../src/store.js";

const RUN = process.env.COOPKITCHEN_INTEGRATION === "1";
const PORT = 8771;
const BASE = `http://127.0.0.1:${PORT}`;

const nodeSocketFactory = (url: string): SocketLike => {
  const ws = new WebSocket(url);
  const like: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  ws.on("open", () => like.onopen?.());
  ws.on("message", (data) => like.onmessage?.({ data: data.toString() }));
  ws.on("close", () => like.onclose?.());
  ws.on("error", (err) => like.onerror?.(err));
  return like;
};

let server: ChildProcess | null = null;

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const res = await fetch(`${BASE}/maps`);
      if (res.ok) {
        return;
      }
    } catch {
      // still booting
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("play server did not come up");
}

describe.runIf(RUN)("live round against the play server", () => {
  beforeAll(async () => {
    server = spawn(
      "python3",
      ["-m", "coopkitchen.cli", "serve", "--port", String(PORT)],
      { stdio: "ignore" },
    );
    await waitForServer();
  }, 30000);

  afterAll(() => {
    server?.kill();
  });

  it("plays a training and a main round with consecutive ticks", async () => {
    const created = await (
      await fetch(`${BASE}/sessions`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({
          map: "map_a",
          roster: ["human", "tom"],
          seed: 21,
          horizon: 500,
          training_ticks: 150,
          tick_ms: 5,
        }),
      })
    ).json();
    const sessionId = created.session_id as string;

    let view: ClientView = initialView();
    const phases: string[] = [];
    const ticksByPhase: Record<string, number[]> = { training: [], playing: [] };
    let done: () => void = () => undefined;
    const finished = new Promise<void>((resolve) => {
      done = resolve;
    });

    const connection = new GameConnection(
      sessionUrl(BASE, sessionId, 0),
      {
        onMessage: (message: ServerMessage) => {
          view = applyMessage(view, message);
          if (message.kind === "state_update") {
            ticksByPhase[message.phase]?.push(message.tick);
            // Keep a human in the loop: submit a move every few ticks.
            if (message.tick % 5 === 0 && message.phase !== "lobby") {
              connection.send(actionSubmit(0, message.tick, "right"));
            }
          } else if (message.kind === "hello") {
            connection.send({ kind: "session_control", op: "start" });
          } else if (message.kind === "end_of_round") {
            phases.push(message.phase);
            if (message.phase === "playing") {
              done();
            }
          }
        },
        onStatus: () => undefined,
      },
      nodeSocketFactory,
    );

    await finished;
    connection.close();

    expect(phases).toEqual(["training", "playing"]);
    const training = ticksByPhase.training;
    expect(training[0]).toBe(1);
    expect(training[training.length - 1]).toBe(150);
    training.forEach((tick, i) => expect(tick).toBe(i + 1));
    const playing = ticksByPhase.playing.filter((t) => t > 0);
    expect(playing[0]).toBe(1);
    expect(playing[playing.length - 1]).toBe(500);
    playing.forEach((tick, i) => expect(tick).toBe(i + 1));
    expect(view.roundOver?.final_score).toBe(view.latest?.score);

    const log = await (
      await fetch(`${BASE}/sessions/${sessionId}/log?phase=playing`)
    ).text();
    expect(log.split("\n").filter((line) => line).length).toBe(502);
  }, 60000);
});

describe("integration placeholder", () => {
  it.skipIf(RUN)("set COOPKITCHEN_INTEGRATION=1 to run the live round test", () => {
    expect(true).toBe(true);
  });
});
