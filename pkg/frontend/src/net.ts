// Connection management: subscribe to a session seat, surface every parsed
// message to the store, and reconnect with backoff after a drop. The same
// class runs in the browser (native WebSocket) and under node tests via an
// injected socket factory.

import { parseServerMessage, type ClientMessage, type ServerMessage } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionHandlers {
  onMessage(message: ServerMessage): void;
  onStatus(status: "connecting" | "open" | "reconnecting" | "closed"): void;
}

export function sessionUrl(base: string, sessionId: string, seat: number): string {
  const ws = base.replace(/^http/, "ws").replace(/\/$/, "");
  return `${ws}/sessions/${sessionId}/ws?seat=${seat}`;
}

export class GameConnection {
  private socket: SocketLike | null = null;
  private closedByUser = false;
  private retryMs = 250;
  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly handlers: ConnectionHandlers;
  private readonly retry: (run: () => void, delayMs: number) => void;

  constructor(
    url: string,
    handlers: ConnectionHandlers,
    factory?: SocketFactory,
    retry: (run: () => void, delayMs: number) => void = (run, ms) =>
      setTimeout(run, ms),
  ) {
    this.url = url;
    this.handlers = handlers;
    this.factory =
      factory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.retry = retry;
    this.open("connecting");
  }

  private open(status: "connecting" | "reconnecting"): void {
    this.handlers.onStatus(status);
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryMs = 250;
      this.handlers.onStatus("open");
    };
    socket.onmessage = (event) => {
      try {
        this.handlers.onMessage(parseServerMessage(String(event.data)));
      } catch {
        // Malformed frames are dropped; the next state_update resyncs us.
      }
    };
    socket.onerror = () => undefined;
    socket.onclose = () => {
      this.socket = null;
      if (this.closedByUser) {
        this.handlers.onStatus("closed");
        return;
      }
      this.handlers.onStatus("reconnecting");
      const delay = this.retryMs;
      this.retryMs = Math.min(this.retryMs * 2, 4000);
      this.retry(() => {
        if (!this.closedByUser) {
          this.open("reconnecting");
        }
      }, delay);
    };
  }

  send(message: ClientMessage): void {
    this.socket?.send(JSON.stringify(message));
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }
}
