// Latest-wins input queue: within one tick window only the newest action
// survives. Synchronous key bursts coalesce before the microtask flush sends
// a single submission; the server's own latest-wins covers the rest.

import type { ActionSymbol } from "./protocol.js";

export class InputQueue {
  private pending: { tick: number; action: ActionSymbol } | null = null;
  private flushScheduled = false;
  private readonly send: (tick: number, action: ActionSymbol) => void;
  private readonly schedule: (run: () => void) => void;

  constructor(
    send: (tick: number, action: ActionSymbol) => void,
    schedule: (run: () => void) => void = (run) => queueMicrotask(run),
  ) {
    this.send = send;
    this.schedule = schedule;
  }

  submit(tick: number, action: ActionSymbol): void {
    this.pending = { tick, action };
    if (!this.flushScheduled) {
      this.flushScheduled = true;
      this.schedule(() => this.flush());
    }
  }

  flush(): void {
    this.flushScheduled = false;
    if (this.pending !== null) {
      this.send(this.pending.tick, this.pending.action);
      this.pending = null;
    }
  }
}
