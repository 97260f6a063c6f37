import type { PanelStore } from "./state.js";
import type { EventEntry, GeoCircle, GeoPoint } from "./types.js";
import { MAX_TEXT_CHARS } from "./types.js";

export interface UiCallbacks {
  onCompose(text: string, discloseLocation: boolean): Promise<void>;
  onRetweet(messageId: number): Promise<void>;
  onSelectTopic(topic: string | null): void;
  onProfile(handle: string): void;
  onInject(text: string, visibility: string): Promise<void>;
  onCircle(circle: GeoCircle | null): void;
}

export interface UiOptions {
  accountKind: string;
  callbacks: UiCallbacks;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function entryNode(entry: EventEntry, cb: UiCallbacks): HTMLElement {
  const item = el("article", { class: `entry kind-${entry.kind}`, "data-seq": String(entry.seq) });
  const author = el("a", { class: "author", href: "#", "data-handle": entry.message.author },
    `@${entry.message.author}`);
  author.addEventListener("click", (ev) => {
    ev.preventDefault();
    cb.onProfile(entry.message.author);
  });
  const body = el("p", { class: "text" }, entry.message.text);
  const meta = el("span", { class: "meta" }, `t+${Math.round(entry.scenario_time)}s`);
  const rt = el("button", { class: "retweet", type: "button" }, "RT");
  rt.addEventListener("click", () => void cb.onRetweet(entry.message.id));
  item.append(author, body, meta, rt);
  return item;
}

/** Build the console: trending list, map, topic feed, unfiltered feed,
 * compose button, plus the always-visible banner and exercise clock. */
export function buildApp(root: HTMLElement, store: PanelStore, opts: UiOptions): { render(): void } {
  const cb = opts.callbacks;
  root.innerHTML = "";

  const banner = el("header", { id: "banner", role: "alert" });
  const status = el("div", { id: "connection-status", class: "live" });
  const clock = el("div", { id: "clock" });

  const trendingPanel = el("section", { id: "panel-trending", class: "panel" });
  const mapPanel = el("section", { id: "panel-map", class: "panel" });
  const topicPanel = el("section", { id: "panel-topic", class: "panel" });
  const unfilteredPanel = el("section", { id: "panel-unfiltered", class: "panel" });

  const composeButton = el("button", { id: "compose-button", type: "button" }, "Tweet");

  // compose popup: live counter, blocks submit past the character limit
  const composePopup = el("div", { id: "compose-popup", hidden: "hidden" });
  const composeText = el("textarea", { id: "compose-text", rows: "3" });
  const composeCounter = el("span", { id: "compose-counter" }, `0/${MAX_TEXT_CHARS}`);
  const composeError = el("div", { id: "compose-error" });
  const discloseWrap = el("label", {}, " disclose my location");
  const disclose = el("input", { id: "disclose-location", type: "checkbox" });
  discloseWrap.prepend(disclose);
  const composeSubmit = el("button", { id: "compose-submit", type: "button" }, "Send");

  function refreshCounter(): void {
    const n = composeText.value.length;
    composeCounter.textContent = `${n}/${MAX_TEXT_CHARS}`;
    const blocked = n === 0 || n > MAX_TEXT_CHARS;
    composeSubmit.disabled = blocked;
    composeCounter.classList.toggle("over", n > MAX_TEXT_CHARS);
  }
  composeText.addEventListener("input", refreshCounter);
  refreshCounter();

  composeButton.addEventListener("click", () => {
    composePopup.hidden = false;
    composeError.textContent = "";
  });
  composeSubmit.addEventListener("click", () => {
    if (composeSubmit.disabled) return;
    void cb
      .onCompose(composeText.value, disclose.checked)
      .then(() => {
        composeText.value = "";
        refreshCounter();
        composePopup.hidden = true;
      })
      .catch((err: Error) => {
        composeError.textContent = err.message; // server-side rejections inline
      });
  });
  composePopup.append(composeText, composeCounter, discloseWrap, composeSubmit, composeError);

  // controller-only affordance: inject with an explicit visibility
  let injectForm: HTMLElement | null = null;
  if (opts.accountKind === "controller") {
    injectForm = el("div", { id: "inject-form" });
    const injectText = el("textarea", { id: "inject-text", rows: "2" });
    const injectVis = el("select", { id: "inject-visibility" });
    for (const v of ["high", "medium", "low"]) injectVis.append(el("option", { value: v }, v));
    const injectSubmit = el("button", { id: "inject-submit", type: "button" }, "Inject");
    injectSubmit.addEventListener("click", () => {
      void cb.onInject(injectText.value, injectVis.value).then(() => {
        injectText.value = "";
      });
    });
    injectForm.append(injectText, injectVis, injectSubmit);
  }

  // map panel: pins drawn in an SVG over the exercise region, plus a
  // geofence form (center + radius)
  const mapSvg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  mapSvg.setAttribute("id", "map-canvas");
  mapSvg.setAttribute("viewBox", "0 0 100 100");
  const fenceForm = el("div", { id: "fence-form" });
  const fenceLat = el("input", { id: "fence-lat", type: "number", placeholder: "lat" });
  const fenceLon = el("input", { id: "fence-lon", type: "number", placeholder: "lon" });
  const fenceRadius = el("input", { id: "fence-radius", type: "number", placeholder: "radius m" });
  const fenceApply = el("button", { id: "fence-apply", type: "button" }, "Limit area");
  const fenceClear = el("button", { id: "fence-clear", type: "button" }, "Clear");
  fenceApply.addEventListener("click", () => {
    const lat = parseFloat(fenceLat.value);
    const lon = parseFloat(fenceLon.value);
    const radiusM = parseFloat(fenceRadius.value);
    if (Number.isFinite(lat) && Number.isFinite(lon) && Number.isFinite(radiusM)) {
      cb.onCircle({ center: { lat, lon }, radiusM });
    }
  });
  fenceClear.addEventListener("click", () => cb.onCircle(null));
  fenceForm.append(fenceLat, fenceLon, fenceRadius, fenceApply, fenceClear);

  const profilePopup = el("aside", { id: "profile-popup", hidden: "hidden" });

  const main = el("main", { id: "panels" });
  main.append(trendingPanel, mapPanel, topicPanel, unfilteredPanel);
  root.append(banner, status, clock, main, composeButton, composePopup, profilePopup);
  if (injectForm) root.append(injectForm);

  function project(p: GeoPoint, bounds: { minLat: number; maxLat: number; minLon: number; maxLon: number }): { x: number; y: number } {
    const spanLat = Math.max(bounds.maxLat - bounds.minLat, 1e-6);
    const spanLon = Math.max(bounds.maxLon - bounds.minLon, 1e-6);
    return {
      x: ((p.lon - bounds.minLon) / spanLon) * 100,
      y: 100 - ((p.lat - bounds.minLat) / spanLat) * 100,
    };
  }

  function render(): void {
    const s = store.state;
    banner.textContent = s.banner;
    status.textContent = s.connection === "live" ? "live" : "reconnecting…";
    status.className = s.connection;
    const t = s.clock ? Math.floor(s.clock.scenario_time) : 0;
    const hh = String(Math.floor(t / 3600)).padStart(2, "0");
    const mm = String(Math.floor((t % 3600) / 60)).padStart(2, "0");
    const ss = String(t % 60).padStart(2, "0");
    clock.textContent = `exercise time ${hh}:${mm}:${ss}${s.clock?.paused ? " (paused)" : ""}`;

    trendingPanel.innerHTML = "<h2>Trending Topics</h2>";
    const list = el("ol", { id: "trending-list" });
    for (const entry of s.trending) {
      const row = el("li", { class: "trend", "data-topic": entry.topic });
      const link = el("a", { href: "#" }, `${entry.topic} (${entry.count})`);
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        cb.onSelectTopic(entry.topic);
      });
      row.append(link);
      list.append(row);
    }
    trendingPanel.append(list);

    topicPanel.innerHTML = `<h2>Topic Microblogs${s.topic ? ": " + s.topic : ""}</h2>`;
    const topicList = el("div", { id: "topic-feed", class: "feed" });
    for (const entry of [...s.topicFeed].reverse()) topicList.append(entryNode(entry, cb));
    topicPanel.append(topicList);

    unfilteredPanel.innerHTML = "<h2>Recent Microblogs</h2>";
    const feed = el("div", { id: "unfiltered-feed", class: "feed" });
    for (const entry of [...s.unfiltered].reverse()) feed.append(entryNode(entry, cb));
    unfilteredPanel.append(feed);

    mapPanel.innerHTML = "<h2>Map Utilities</h2>";
    mapSvg.innerHTML = "";
    const pts = s.pins.map((p) => ({ lat: p.lat, lon: p.lon }));
    if (s.circle) pts.push(s.circle.center);
    const bounds = {
      minLat: Math.min(...pts.map((p) => p.lat), 90),
      maxLat: Math.max(...pts.map((p) => p.lat), -90),
      minLon: Math.min(...pts.map((p) => p.lon), 180),
      maxLon: Math.max(...pts.map((p) => p.lon), -180),
    };
    if (s.circle) {
      const c = project(s.circle.center, bounds);
      const ring = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      ring.setAttribute("class", "geofence");
      ring.setAttribute("cx", String(c.x));
      ring.setAttribute("cy", String(c.y));
      ring.setAttribute("r", "12");
      mapSvg.append(ring);
    }
    for (const pin of s.pins) {
      const c = project({ lat: pin.lat, lon: pin.lon }, bounds);
      const dot = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      dot.setAttribute("class", "pin");
      dot.setAttribute("data-id", String(pin.id));
      dot.setAttribute("cx", String(c.x));
      dot.setAttribute("cy", String(c.y));
      dot.setAttribute("r", "1.5");
      mapSvg.append(dot);
    }
    mapPanel.append(mapSvg, fenceForm);
  }

  store.subscribe(render);
  render();
  return { render };
}

export function showProfile(
  root: HTMLElement,
  profile: { handle: string; kind: string; visibility: string; profile_url: string | null } | null,
  error?: string,
): void {
  const popup = root.querySelector<HTMLElement>("#profile-popup");
  if (!popup) return;
  popup.hidden = false;
  if (profile === null) {
    popup.innerHTML = "";
    popup.append(el("div", { class: "toast error" }, error ?? "profile unavailable"));
    return;
  }
  popup.innerHTML = "";
  popup.append(
    el("h3", {}, `@${profile.handle}`),
    el("p", { class: "kind" }, `${profile.kind} (${profile.visibility} visibility)`),
  );
  if (profile.profile_url) {
    popup.append(el("a", { href: profile.profile_url, target: "_blank" }, "full profile"));
  }
}
