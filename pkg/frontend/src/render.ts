// Canvas renderer: kitchen grid, station glyphs, agents with held items, the
// order urgency bars, score, and the connection banner.

import type { ClientView } from "./store.js";
import { displayedScore, orderValue } from "./store.js";
import type { Item, StationView } from "./protocol.js";

const CELL = 36;

const STATION_COLORS: Record<StationView["kind"], string> = {
  counter: "#8d7b68",
  dispenser: "#4a7c59",
  board: "#b08968",
  pot: "#495867",
  window: "#a47148",
};

const INGREDIENT_COLORS: Record<string, string> = {
  onion: "#e8c547",
  tomato: "#d64545",
  lettuce: "#7fb069",
};

function itemColor(item: Item): string {
  if (item.kind === "soup") {
    return "#f2a65a";
  }
  return INGREDIENT_COLORS[item.ingredient ?? ""] ?? "#cccccc";
}

interface ParsedMap {
  width: number;
  height: number;
  rows: string[];
}

export function parseMapText(text: string): ParsedMap {
  const lines = text.trim().split("\n");
  const rows = lines.slice(1); // drop the name= header
  return { width: rows[0]?.length ?? 0, height: rows.length, rows };
}

export function sizeCanvas(canvas: HTMLCanvasElement, map: ParsedMap): void {
  canvas.width = map.width * CELL;
  canvas.height = map.height * CELL + 64; // HUD strip below the grid
}

export function render(
  canvas: HTMLCanvasElement,
  view: ClientView,
  map: ParsedMap,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  ctx.fillStyle = "#2b2b2b";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  for (let y = 0; y < map.height; y++) {
    for (let x = 0; x < map.width; x++) {
      const ch = map.rows[y][x];
      ctx.fillStyle = ch === "#" ? "#555049" : "#d9d2c5";
      if (ch !== "#" && !(ch >= "0" && ch <= "9") && ch !== ".") {
        ctx.fillStyle = "#555049";
      }
      ctx.fillRect(x * CELL, y * CELL, CELL - 1, CELL - 1);
    }
  }

  const update = view.latest;
  if (update !== null) {
    for (const station of update.stations) {
      const [x, y] = station.pos;
      ctx.fillStyle = STATION_COLORS[station.kind];
      ctx.fillRect(x * CELL, y * CELL, CELL - 1, CELL - 1);
      ctx.fillStyle = "#ffffff";
      ctx.font = "bold 14px sans-serif";
      ctx.textAlign = "center";
      const glyph =
        station.kind === "dispenser"
          ? (station.ingredient ?? "?")[0].toUpperCase()
          : station.kind[0].toUpperCase();
      ctx.fillText(glyph, x * CELL + CELL / 2, y * CELL + CELL / 2 - 4);
      station.items.forEach((item, i) => {
        ctx.fillStyle = itemColor(item);
        ctx.beginPath();
        ctx.arc(
          x * CELL + 8 + 9 * i,
          y * CELL + CELL - 8,
          4,
          0,
          2 * Math.PI,
        );
        ctx.fill();
      });
    }

    update.agents.forEach((agent, i) => {
      const [x, y] = agent.pos;
      ctx.fillStyle = i === view.seat ? "#3f88c5" : "#848c8e";
      ctx.beginPath();
      ctx.arc(x * CELL + CELL / 2, y * CELL + CELL / 2, CELL / 2 - 5, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#ffffff";
      ctx.font = "12px sans-serif";
      ctx.fillText(String(i), x * CELL + CELL / 2, y * CELL + CELL / 2 + 4);
      if (agent.held !== null) {
        ctx.fillStyle = itemColor(agent.held);
        ctx.beginPath();
        ctx.arc(x * CELL + CELL - 9, y * CELL + 9, 5, 0, 2 * Math.PI);
        ctx.fill();
      }
    });
  }

  // HUD: score, tick/phase, order urgency bars, connection banner.
  const hudY = map.height * CELL;
  ctx.fillStyle = "#1d1d1d";
  ctx.fillRect(0, hudY, canvas.width, 64);
  ctx.fillStyle = "#ffffff";
  ctx.font = "bold 16px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(`score ${displayedScore(view)}`, 8, hudY + 22);
  ctx.font = "12px sans-serif";
  const phase = update?.phase ?? "lobby";
  ctx.fillText(`tick ${update?.tick ?? 0}  ${phase}`, 8, hudY + 42);

  const orders = update?.orders ?? [];
  orders.forEach((order, i) => {
    const x0 = 160 + i * 120;
    const value = orderValue(order.age);
    ctx.fillStyle = "#444444";
    ctx.fillRect(x0, hudY + 12, 100, 12);
    ctx.fillStyle = value > 75 ? "#7fb069" : value > 30 ? "#e8c547" : "#d64545";
    ctx.fillRect(x0, hudY + 12, (100 * value) / 150, 12);
    ctx.fillStyle = "#ffffff";
    ctx.fillText(`${order.recipe} ${value}`, x0, hudY + 40);
  });

  if (view.status !== "open") {
    ctx.fillStyle = "#d64545";
    ctx.fillRect(0, 0, canvas.width, 22);
    ctx.fillStyle = "#ffffff";
    ctx.textAlign = "center";
    ctx.fillText(`connection: ${view.status}`, canvas.width / 2, 16);
  }
  if (view.roundOver !== null) {
    ctx.fillStyle = "rgba(0,0,0,0.65)";
    ctx.fillRect(0, 0, canvas.width, map.height * CELL);
    ctx.fillStyle = "#ffffff";
    ctx.font = "bold 22px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(
      `${view.roundOver.phase} over: ${view.roundOver.final_score} points`,
      canvas.width / 2,
      (map.height * CELL) / 2,
    );
  }
}
