import type { EventEntry } from "./types.js";

// Minimal surface of a browser WebSocket, injectable for tests.
export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WebSocketLike;

export interface StreamHandle {
  close(): void;
  lastSeq(): number;
}

export interface StreamOptions {
  baseUrl: string; // ws://host:port
  token: string;
  since: number;
  onEntry: (entry: EventEntry) => void;
  onStatus?: (status: "live" | "reconnecting") => void;
  wsFactory?: WsFactory;
  retryDelayMs?: number;
}

/** Subscribe to the push channel. On a dropped connection the client
 * re-subscribes from the last acknowledged sequence number, so the feed
 * never loses or duplicates entries. */
export function connectStream(opts: StreamOptions): StreamHandle {
  const factory: WsFactory =
    opts.wsFactory ?? ((url) => new WebSocket(url) as unknown as WebSocketLike);
  const retryDelay = opts.retryDelayMs ?? 1000;
  let lastSeq = opts.since;
  let stopped = false;
  let current: WebSocketLike | null = null;
  let retryTimer: ReturnType<typeof setTimeout> | null = null;

  function open(): void {
    if (stopped) return;
    const url = `${opts.baseUrl}/subscribe?token=${encodeURIComponent(opts.token)}&since=${lastSeq}`;
    const ws = factory(url);
    current = ws;
    ws.onopen = () => opts.onStatus?.("live");
    ws.onmessage = (ev) => {
      const entry = JSON.parse(ev.data) as EventEntry;
      if (entry.seq <= lastSeq) return; // duplicate from a racy resume
      lastSeq = entry.seq;
      opts.onEntry(entry);
    };
    ws.onerror = () => {
      /* onclose follows and drives the retry */
    };
    ws.onclose = () => {
      if (stopped) return;
      opts.onStatus?.("reconnecting");
      retryTimer = setTimeout(open, retryDelay);
    };
  }

  open();
  return {
    close() {
      stopped = true;
      if (retryTimer !== null) clearTimeout(retryTimer);
      current?.close();
    },
    lastSeq: () => lastSeq,
  };
}
