// Scripted console session against the fake service: the acceptance
// checks for the operator UI.
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { startApp, type App } from "../src/main.js";
import { haversineM } from "../src/geo.js";
import { FakeServer, entry, flushMicrotasks } from "./helpers.js";

let server: FakeServer;
let root: HTMLElement;

async function launch(handle = "pio_city"): Promise<App> {
  server = new FakeServer();
  server.trending = [
    { topic: "#daytonbomb", count: 12, rank: 1 },
    { topic: "shelter", count: 7, rank: 2 },
  ];
  server.log.push(entry(1, "first #daytonbomb report"), entry(2, "quiet chatter"));
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
  const api = new ApiClient("http://fake", server.fetchImpl);
  const session = await api.login(handle, "pw");
  const app = await startApp(session, {
    root,
    api,
    wsBaseUrl: "ws://fake",
    wsFactory: server.wsFactory,
    trendingPollMs: 3_600_000,
    location: { lat: 39.7, lon: -84.2 },
  });
  await flushMicrotasks();
  return app;
}

describe("console conformance", () => {
  beforeEach(async () => {
    await launch();
  });

  it("shows all five panels plus clock, and the banner stays visible", () => {
    for (const id of [
      "panel-trending",
      "panel-map",
      "panel-topic",
      "panel-unfiltered",
      "compose-button",
      "clock",
    ]) {
      expect(root.querySelector(`#${id}`), id).not.toBeNull();
    }
    const banner = root.querySelector("#banner")!;
    expect(banner.textContent).toContain("EXERCISE");
    // the banner survives every later state change
    server.emit(entry(3, "more traffic"));
    expect(root.querySelector("#banner")!.textContent).toContain("EXERCISE");
  });

  it("streams pushes into the unfiltered feed newest-first without loss", async () => {
    server.emit(entry(3, "third message"));
    server.emit(entry(4, "fourth message"));
    await flushMicrotasks();
    const seqs = [...root.querySelectorAll("#unfiltered-feed .entry")].map((n) =>
      Number(n.getAttribute("data-seq")),
    );
    expect(seqs).toEqual([4, 3, 2, 1]); // rendered top-down, newest first
  });

  it("blocks compose past 140 characters client-side", () => {
    (root.querySelector("#compose-button") as HTMLButtonElement).click();
    const text = root.querySelector("#compose-text") as HTMLTextAreaElement;
    const submit = root.querySelector("#compose-submit") as HTMLButtonElement;
    const counter = root.querySelector("#compose-counter")!;

    text.value = "x".repeat(140);
    text.dispatchEvent(new Event("input"));
    expect(counter.textContent).toBe("140/140");
    expect(submit.disabled).toBe(false);

    text.value = "x".repeat(141);
    text.dispatchEvent(new Event("input"));
    expect(counter.textContent).toBe("141/140");
    expect(submit.disabled).toBe(true);
    submit.click();
    expect(server.posts).toHaveLength(0); // nothing reached the server
  });

  it("sends location only when disclosed", async () => {
    (root.querySelector("#compose-button") as HTMLButtonElement).click();
    const text = root.querySelector("#compose-text") as HTMLTextAreaElement;
    text.value = "status update one";
    text.dispatchEvent(new Event("input"));
    (root.querySelector("#compose-submit") as HTMLButtonElement).click();
    await flushMicrotasks();

    (root.querySelector("#compose-button") as HTMLButtonElement).click();
    text.value = "status update two";
    text.dispatchEvent(new Event("input"));
    (root.querySelector("#disclose-location") as HTMLInputElement).checked = true;
    (root.querySelector("#compose-submit") as HTMLButtonElement).click();
    await flushMicrotasks();

    expect(server.posts[0]).toEqual({ text: "status update one" });
    expect(server.posts[1]).toEqual({ text: "status update two", lat: 39.7, lon: -84.2 });
  });

  it("clicking a trending topic filters the topic feed", async () => {
    (root.querySelector('li[data-topic="#daytonbomb"] a') as HTMLAnchorElement).click();
    await flushMicrotasks();
    const shown = [...root.querySelectorAll("#topic-feed .entry .text")].map(
      (n) => n.textContent,
    );
    expect(shown).toEqual(["first #daytonbomb report"]);
    expect(root.querySelector("#panel-topic h2")!.textContent).toContain("#daytonbomb");
    // live matching entries join the filtered feed, others do not
    server.emit(entry(3, "another #daytonbomb sighting"));
    server.emit(entry(4, "irrelevant"));
    await flushMicrotasks();
    const after = [...root.querySelectorAll("#topic-feed .entry")].map((n) =>
      Number(n.getAttribute("data-seq")),
    );
    expect(after).toEqual([3, 1]);
  });

  it("geofence excludes new out-of-area pins", async () => {
    const center = { lat: 39.5, lon: -84.5 };
    const near = { lat: 39.5, lon: -84.497 };
    const far = { lat: 39.9, lon: -84.05 };
    server.emit(entry(3, "geotagged a", center));
    await flushMicrotasks();
    expect(root.querySelectorAll("#map-canvas .pin")).toHaveLength(1);

    (root.querySelector("#fence-lat") as HTMLInputElement).value = String(center.lat);
    (root.querySelector("#fence-lon") as HTMLInputElement).value = String(center.lon);
    (root.querySelector("#fence-radius") as HTMLInputElement).value = String(
      Math.ceil(haversineM(center, near)) + 1,
    );
    (root.querySelector("#fence-apply") as HTMLButtonElement).click();
    expect(root.querySelectorAll("#map-canvas .geofence")).toHaveLength(1);

    server.emit(entry(4, "geotagged near", near));
    server.emit(entry(5, "geotagged far", far));
    await flushMicrotasks();
    const ids = [...root.querySelectorAll("#map-canvas .pin")].map((n) =>
      Number(n.getAttribute("data-id")),
    );
    expect(ids).toEqual([3, 4]); // the far message added no pin
  });

  it("reconnect resumes with no lost or duplicated messages vs /stream", async () => {
    for (let i = 3; i <= 6; i++) server.emit(entry(i, `live ${i}`));
    // drop the channel; more traffic lands while offline
    server.sockets[0].dropFromServer();
    expect(root.querySelector("#connection-status")!.className).toBe("reconnecting");
    server.log.push(entry(7, "offline 7"), entry(8, "offline 8"));
    await new Promise((r) => setTimeout(r, 1100));
    await flushMicrotasks();
    server.emit(entry(9, "after resume"));
    expect(root.querySelector("#connection-status")!.className).toBe("live");

    // ground truth: page the log the same way the server serves GET /stream
    const api = new ApiClient("http://fake", server.fetchImpl);
    const truth: number[] = [];
    let since = 0;
    for (;;) {
      const page = await api.stream(since, 3);
      if (!page.entries.length) break;
      truth.push(...page.entries.map((e) => e.seq));
      since = page.next_since;
    }
    const feed = [...root.querySelectorAll("#unfiltered-feed .entry")]
      .map((n) => Number(n.getAttribute("data-seq")))
      .reverse();
    expect(feed).toEqual(truth);
  });

  it("opens profile popups, with an error toast for unknown handles", async () => {
    const author = root.querySelector("#unfiltered-feed .entry .author") as HTMLAnchorElement;
    author.click();
    await flushMicrotasks();
    const popup = root.querySelector("#profile-popup") as HTMLElement;
    expect(popup.hidden).toBe(false);
    expect(popup.textContent).toContain("@cit");

    const api = new ApiClient("http://fake", server.fetchImpl);
    await api.profile("nobody").catch(() => undefined);
    const { showProfile } = await import("../src/ui.js");
    showProfile(root, null, "no profile");
    expect(popup.querySelector(".toast.error")!.textContent).toBe("no profile");
  });

  it("retweet buttons relay through the API", async () => {
    const rt = root.querySelector("#unfiltered-feed .entry .retweet") as HTMLButtonElement;
    rt.click();
    await flushMicrotasks();
    expect(server.retweets).toHaveLength(1);
  });
});

describe("controller affordances", () => {
  it("controller sessions see the inject form with a visibility selector", async () => {
    await launch("control");
    const form = root.querySelector("#inject-form")!;
    expect(form).not.toBeNull();
    const options = [...form.querySelectorAll("#inject-visibility option")].map(
      (o) => (o as HTMLOptionElement).value,
    );
    expect(options).toEqual(["high", "medium", "low"]);
    (form.querySelector("#inject-text") as HTMLTextAreaElement).value = "spontaneous rumor";
    (form.querySelector("#inject-visibility") as HTMLSelectElement).value = "medium";
    (form.querySelector("#inject-submit") as HTMLButtonElement).click();
    await flushMicrotasks();
    expect(server.injects).toEqual([
      { text: "spontaneous rumor", visibility: "medium", author_handle: null },
    ]);
  });

  it("pio sessions do not get the inject form", async () => {
    await launch("pio_city");
    expect(root.querySelector("#inject-form")).toBeNull();
  });
});
