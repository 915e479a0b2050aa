/** Session client: command POSTs plus a streaming event subscription.
 *
 * The event stream is consumed with fetch + ReadableStream so the same
 * code runs in the browser and under node for tests. Edits are debounced:
 * a burst of paint strokes becomes one SetTarget 150 ms after the last.
 */

import {
  CommandType,
  DimensionRef,
  RoomJson,
  SessionEvent,
  parseEvent,
} from "./protocol.js";

export const EDIT_DEBOUNCE_MS = 150;

export interface ClientCallbacks {
  onEvent: (event: SessionEvent) => void;
  onConnection?: (live: boolean) => void;
}

export class SessionClient {
  readonly baseUrl: string;
  sessionId: string | null = null;
  private seq = 0;
  private callbacks: ClientCallbacks;
  private closed = false;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private pendingRoom: RoomJson | null = null;
  private reader: ReadableStreamDefaultReader<Uint8Array> | null = null;

  constructor(baseUrl: string, callbacks: ClientCallbacks) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.callbacks = callbacks;
  }

  async open(body: { config?: object; target?: RoomJson } = {}): Promise<RoomJson> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw new Error(`session open failed: ${resp.status}`);
    const opened = await resp.json();
    this.sessionId = opened.session;
    void this.listen();
    return opened.payload.target as RoomJson;
  }

  async reconnect(): Promise<void> {
    if (this.sessionId === null || this.closed) return;
    void this.listen();
  }

  private async listen(): Promise<void> {
    if (this.sessionId === null) return;
    try {
      const resp = await fetch(`${this.baseUrl}/sessions/${this.sessionId}/events`);
      if (!resp.ok || !resp.body) throw new Error(`subscribe failed: ${resp.status}`);
      this.callbacks.onConnection?.(true);
      this.reader = resp.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await this.reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let cut;
        while ((cut = buffer.indexOf("\n\n")) >= 0) {
          const frame = buffer.slice(0, cut);
          buffer = buffer.slice(cut + 2);
          if (!frame.startsWith("data: ")) continue; // heartbeat comment
          const event = parseEvent(frame.slice(6));
          if (event) this.callbacks.onEvent(event);
        }
      }
    } catch {
      // fall through to reconnect logic below
    }
    if (!this.closed) {
      this.callbacks.onConnection?.(false);
      setTimeout(() => void this.reconnect(), 1000);
    }
  }

  async command(type: CommandType, payload: object = {}): Promise<Response> {
    if (this.sessionId === null) throw new Error("no open session");
    this.seq += 1;
    return fetch(`${this.baseUrl}/sessions/${this.sessionId}/commands`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ session: this.sessionId, seq: this.seq, type, payload }),
    });
  }

  /** Debounced target update: called on every paint stroke. */
  queueTarget(room: RoomJson): void {
    this.pendingRoom = room;
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.flushTarget();
    }, EDIT_DEBOUNCE_MS);
  }

  async flushTarget(): Promise<void> {
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
      this.debounceTimer = null;
    }
    if (this.pendingRoom === null) return;
    const room = this.pendingRoom;
    this.pendingRoom = null;
    await this.command("SetTarget", { room });
  }

  async setDimensions(dims: DimensionRef[]): Promise<void> {
    await this.command("SetDimensions", { dims });
  }

  async applySuggestion(cell: number[]): Promise<void> {
    await this.command("ApplySuggestion", { cell });
  }

  async restart(): Promise<void> {
    await this.command("Restart");
  }

  async close(): Promise<void> {
    this.closed = true;
    if (this.sessionId !== null) {
      try {
        await this.command("Stop");
      } catch {
        // server may already be gone
      }
    }
    try {
      await this.reader?.cancel();
    } catch {
      // stream already closed
    }
  }
}
