// Scripted stand-in for the stream service: serves the documented
// endpoints from an in-memory log and exposes a controllable push channel.
import type { EventEntry, Microblog, SessionInfo, TrendingEntry } from "../src/types.js";
import type { WebSocketLike } from "../src/stream.js";

export function message(id: number, text: string, geo?: { lat: number; lon: number }): Microblog {
  return {
    id,
    scenario_time: id,
    author: `cit${id % 5}`,
    text,
    hashtags: (text.match(/#\w+/g) ?? []).filter((t, i, a) => a.indexOf(t) === i),
    visibility: "low",
    source: "background",
    geo: geo ?? null,
    retweet_of: null,
    category: null,
  };
}

export function entry(seq: number, text: string, geo?: { lat: number; lon: number }): EventEntry {
  return {
    seq,
    wall_time: 1000 + seq,
    scenario_time: seq,
    kind: "emitted",
    message: message(seq, text, geo),
  };
}

export class FakeSocket implements WebSocketLike {
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  closedByClient = false;

  constructor(public url: string, public server: FakeServer) {}

  open(): void {
    this.onopen?.();
  }

  deliver(e: EventEntry): void {
    this.onmessage?.({ data: JSON.stringify(e) });
  }

  dropFromServer(): void {
    this.onclose?.();
  }

  close(): void {
    this.closedByClient = true;
  }
}

export class FakeServer {
  log: EventEntry[] = [];
  trending: TrendingEntry[] = [];
  sockets: FakeSocket[] = [];
  posts: Array<{ text: string; lat?: number; lon?: number }> = [];
  injects: Array<{ text: string; visibility: string }> = [];
  retweets: number[] = [];

  /** Append to the ground-truth log and push to connected sockets. */
  emit(e: EventEntry): void {
    this.log.push(e);
    for (const s of this.sockets) {
      if (!s.closedByClient) s.deliver(e);
    }
  }

  session(handle: string): SessionInfo {
    return {
      token: "tok-test",
      handle,
      kind: handle === "control" ? "controller" : "pio",
      visibility: "high",
      banner: "EXERCISE BANNER: simulated content",
      clock: {
        scenario_time: 0,
        compression: 60,
        paused: false,
        banner: "EXERCISE BANNER: simulated content",
        last_seq: this.log.length,
        pending: 0,
        replay_finished: false,
      },
    };
  }

  wsFactory = (url: string): WebSocketLike => {
    const sock = new FakeSocket(url, this);
    this.sockets.push(sock);
    queueMicrotask(() => {
      sock.open();
      const since = Number(new URL(url, "http://x").searchParams.get("since") ?? "0");
      for (const e of this.log) {
        if (e.seq > since && !sock.closedByClient) sock.deliver(e);
      }
    });
    return sock;
  };

  fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const u = new URL(url, "http://fake");
    const path = u.pathname;
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const json = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (path === "/session") return json(this.session(body.handle));
    if (path === "/stream") {
      const since = Number(u.searchParams.get("since") ?? "0");
      const limit = Number(u.searchParams.get("limit") ?? "50");
      const entries = this.log.filter((e) => e.seq > since).slice(0, limit);
      return json({
        entries,
        next_since: entries.length ? entries[entries.length - 1].seq : since,
      });
    }
    if (path === "/trending") return json({ entries: this.trending });
    if (path.startsWith("/topics/")) {
      const topic = decodeURIComponent(path.slice("/topics/".length)).toLowerCase();
      const entries = this.log.filter((e) => e.message.text.toLowerCase().includes(topic));
      return json({
        entries,
        next_since: entries.length ? entries[entries.length - 1].seq : 0,
      });
    }
    if (path === "/messages") {
      if (body.text.length > 140) return json({ detail: "message too long" }, 422);
      this.posts.push(body);
      return json({ id: 9000 + this.posts.length, seq: this.log.length + 1 });
    }
    if (path === "/retweets") {
      this.retweets.push(body.message_id);
      return json({ id: 9500 + this.retweets.length, seq: this.log.length + 1 });
    }
    if (path === "/inject") {
      this.injects.push(body);
      return json({ id: 9800 + this.injects.length, seq: this.log.length + 1 });
    }
    if (path === "/map") {
      const pins = this.log
        .filter((e) => e.message.geo)
        .map((e) => ({ ...e.message.geo!, id: e.message.id }));
      return json({ pins });
    }
    if (path.startsWith("/profiles/")) {
      const handle = decodeURIComponent(path.slice("/profiles/".length));
      if (handle === "nobody") return json({ detail: "no profile" }, 404);
      return json({ handle, kind: "pio", visibility: "high", profile_url: null });
    }
    if (path === "/clock") return json(this.session("x").clock);
    return json({ detail: `unhandled ${path}` }, 404);
  };
}

export function flushMicrotasks(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
