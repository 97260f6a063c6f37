import { ApiClient } from "./api.js";
import { PanelStore } from "./state.js";
import { connectStream, type StreamHandle, type WsFactory } from "./stream.js";
import { buildApp, showProfile } from "./ui.js";
import type { GeoCircle, SessionInfo } from "./types.js";

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  wsBaseUrl: string;
  wsFactory?: WsFactory;
  trendingPollMs?: number;
  location?: { lat: number; lon: number }; // used when the PIO discloses it
}

export interface App {
  store: PanelStore;
  stream: StreamHandle;
  stop(): void;
}

/** Wire the console to a live session: seed the feed over the paging API,
 * then follow the push channel with resume; panels derive everything from
 * server responses. */
export async function startApp(session: SessionInfo, opts: AppOptions): Promise<App> {
  const { api, root } = opts;
  const store = new PanelStore(session.banner);
  store.setClock(session.clock);

  const ui = buildApp(root, store, {
    accountKind: session.kind,
    callbacks: {
      async onCompose(text, discloseLocation) {
        await api.post(text, discloseLocation ? opts.location : undefined);
      },
      async onRetweet(messageId) {
        await api.retweet(messageId);
      },
      onSelectTopic(topic) {
        if (topic === null) {
          store.selectTopic(null, []);
          return;
        }
        void api.topicFeed(topic, 0, 100).then((page) => {
          store.selectTopic(topic, page.entries);
        });
      },
      onProfile(handle) {
        api
          .profile(handle)
          .then((p) => showProfile(root, p))
          .catch((err: Error) => showProfile(root, null, err.message));
      },
      async onInject(text, visibility) {
        await api.inject(text, visibility);
      },
      onCircle(circle: GeoCircle | null) {
        store.setCircle(circle);
      },
    },
  });

  // backlog first, then live entries resume from the last seeded seq
  let since = 0;
  for (;;) {
    const page = await api.stream(since, 500);
    if (page.entries.length === 0) break;
    store.seedFeed(page.entries);
    since = page.next_since;
  }

  const stream = connectStream({
    baseUrl: opts.wsBaseUrl,
    token: session.token,
    since: store.state.lastSeq,
    wsFactory: opts.wsFactory,
    onEntry: (entry) => store.applyEntry(entry),
    onStatus: (status) => store.setConnection(status),
  });

  const refreshTrending = () =>
    api
      .trending(20)
      .then((r) => store.setTrending(r.entries))
      .catch(() => undefined);
  const refreshClock = () =>
    api
      .clock()
      .then((c) => store.setClock(c))
      .catch(() => undefined);
  await refreshTrending();
  const pollMs = opts.trendingPollMs ?? 3000;
  const timer = setInterval(() => {
    void refreshTrending();
    void refreshClock();
  }, pollMs);

  ui.render();
  return {
    store,
    stream,
    stop() {
      clearInterval(timer);
      stream.close();
    },
  };
}

/** Browser entry point: login form, then the console. */
export function mountLogin(root: HTMLElement, baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  root.innerHTML = `
    <form id="login-form">
      <h1>Exercise feed login</h1>
      <input id="login-handle" placeholder="handle" autocomplete="username">
      <input id="login-password" type="password" placeholder="password" autocomplete="current-password">
      <button type="submit">Sign in</button>
      <div id="login-error" role="alert"></div>
    </form>`;
  const form = root.querySelector<HTMLFormElement>("#login-form")!;
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const handle = root.querySelector<HTMLInputElement>("#login-handle")!.value;
    const password = root.querySelector<HTMLInputElement>("#login-password")!.value;
    api
      .login(handle, password)
      .then((session) => {
        const wsBase = (baseUrl || window.location.origin).replace(/^http/, "ws");
        return startApp(session, { root, api, wsBaseUrl: wsBase });
      })
      .catch((err: Error) => {
        root.querySelector("#login-error")!.textContent = err.message;
      });
  });
}
