// Wire protocol spoken with the play server. Messages are JSON objects
// discriminated by `kind`; the server owns all game logic and the client only
// renders state_updates and submits key actions.

export const MOVE_ACTIONS = [
  "up",
  "up_right",
  "right",
  "down_right",
  "down",
  "down_left",
  "left",
  "up_left",
] as const;

export const TASK_ACTIONS = ["pick", "drop", "chop", "cook", "serve"] as const;

export type MoveAction = (typeof MOVE_ACTIONS)[number];
export type TaskAction = (typeof TASK_ACTIONS)[number];
export type ActionSymbol = MoveAction | TaskAction | "stay";

export interface Item {
  kind: "raw" | "chopped" | "soup";
  ingredient?: string;
  contents?: string[];
}

export interface AgentView {
  pos: [number, number];
  held: Item | null;
}

export interface StationView {
  kind: "dispenser" | "board" | "pot" | "window" | "counter";
  pos: [number, number];
  ingredient?: string;
  items: Item[];
}

export interface OrderView {
  id: number;
  recipe: string;
  age: number;
}

export interface StateUpdate {
  kind: "state_update";
  tick: number;
  phase: "lobby" | "training" | "playing" | "finished";
  agents: AgentView[];
  stations: StationView[];
  orders: OrderView[];
  score: number;
}

export interface ScoreEvent {
  kind: "score_event";
  tick: number;
  points: number;
  order_id: number;
}

export interface EndOfRound {
  kind: "end_of_round";
  phase: string;
  final_score: number;
}

export interface Hello {
  kind: "hello";
  seat: number;
  map: string;
  roster: string[];
  phase: string;
  tick_ms: number;
}

export interface Ack {
  kind: "ack";
  tick?: number;
  op?: string;
}

export interface Stale {
  kind: "stale";
  tick: number;
}

export interface ErrorMessage {
  kind: "error";
  error: string;
}

export type ServerMessage =
  | StateUpdate
  | ScoreEvent
  | EndOfRound
  | Hello
  | Ack
  | Stale
  | ErrorMessage;

export interface ActionSubmit {
  kind: "action_submit";
  tick: number;
  seat: number;
  action: ActionSymbol;
}

export interface SessionControl {
  kind: "session_control";
  op: "start" | "restart";
}

export type ClientMessage = ActionSubmit | SessionControl;

const SERVER_KINDS = new Set([
  "state_update",
  "score_event",
  "end_of_round",
  "hello",
  "ack",
  "stale",
  "error",
]);

export function isActionSymbol(value: unknown): value is ActionSymbol {
  return (
    typeof value === "string" &&
    (value === "stay" ||
      (MOVE_ACTIONS as readonly string[]).includes(value) ||
      (TASK_ACTIONS as readonly string[]).includes(value))
  );
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error(`not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof data !== "object" || data === null) {
    throw new Error("message is not an object");
  }
  const kind = (data as { kind?: unknown }).kind;
  if (typeof kind !== "string" || !SERVER_KINDS.has(kind)) {
    throw new Error(`unknown message kind: ${String(kind)}`);
  }
  if (kind === "state_update") {
    const update = data as StateUpdate;
    if (typeof update.tick !== "number" || !Array.isArray(update.agents)) {
      throw new Error("malformed state_update");
    }
  }
  return data as ServerMessage;
}

export function actionSubmit(
  seat: number,
  tick: number,
  action: ActionSymbol,
): ActionSubmit {
  return { kind: "action_submit", seat, tick, action };
}
