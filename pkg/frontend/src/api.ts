import type {
  ClockInfo,
  FeedPage,
  MapPin,
  Profile,
  SessionInfo,
  TrendingEntry,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

/** Thin typed client over the documented endpoints; the transport is
 * injectable so tests can script the server. */
export class ApiClient {
  private token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const payload = await resp.json();
        if (payload && typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  async login(handle: string, password: string): Promise<SessionInfo> {
    const session = await this.request<SessionInfo>("POST", "/session", {
      handle,
      password,
    });
    this.token = session.token;
    return session;
  }

  post(text: string, geo?: { lat: number; lon: number }): Promise<{ id: number; seq: number }> {
    return this.request("POST", "/messages", { text, ...(geo ?? {}) });
  }

  retweet(messageId: number): Promise<{ id: number; seq: number }> {
    return this.request("POST", "/retweets", { message_id: messageId });
  }

  inject(
    text: string,
    visibility: string,
    authorHandle?: string,
  ): Promise<{ id: number; seq: number }> {
    return this.request("POST", "/inject", {
      text,
      visibility,
      author_handle: authorHandle ?? null,
    });
  }

  trending(k = 20): Promise<{ entries: TrendingEntry[] }> {
    return this.request("GET", `/trending?k=${k}`);
  }

  topicFeed(topic: string, since = 0, limit = 50): Promise<FeedPage> {
    return this.request(
      "GET",
      `/topics/${encodeURIComponent(topic)}?since=${since}&limit=${limit}`,
    );
  }

  stream(since = 0, limit = 50): Promise<FeedPage> {
    return this.request("GET", `/stream?since=${since}&limit=${limit}`);
  }

  mapPins(params: {
    topic?: string;
    lat?: number;
    lon?: number;
    radiusM?: number;
  } = {}): Promise<{ pins: MapPin[] }> {
    const q = new URLSearchParams();
    if (params.topic) q.set("topic", params.topic);
    if (params.lat !== undefined) q.set("lat", String(params.lat));
    if (params.lon !== undefined) q.set("lon", String(params.lon));
    if (params.radiusM !== undefined) q.set("radius_m", String(params.radiusM));
    const qs = q.toString();
    return this.request("GET", `/map${qs ? "?" + qs : ""}`);
  }

  profile(handle: string): Promise<Profile> {
    return this.request("GET", `/profiles/${encodeURIComponent(handle)}`);
  }

  clock(): Promise<ClockInfo> {
    return this.request("GET", "/clock");
  }
}
