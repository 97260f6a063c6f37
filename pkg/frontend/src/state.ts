import { circleContains } from "./geo.js";
import { messageMentions } from "./topics.js";
import type {
  ClockInfo,
  EventEntry,
  GeoCircle,
  MapPin,
  TrendingEntry,
} from "./types.js";

export type ConnectionStatus = "live" | "reconnecting";

export interface PanelState {
  banner: string;
  clock: ClockInfo | null;
  trending: TrendingEntry[];
  unfiltered: EventEntry[]; // ascending seq; rendered newest-first
  lastSeq: number;
  topic: string | null;
  topicFeed: EventEntry[];
  pins: MapPin[];
  circle: GeoCircle | null;
  connection: ConnectionStatus;
}

export function initialState(banner: string): PanelState {
  return {
    banner,
    clock: null,
    trending: [],
    unfiltered: [],
    lastSeq: 0,
    topic: null,
    topicFeed: [],
    pins: [],
    circle: null,
    connection: "live",
  };
}

/** All state changes flow through here: server entries and user input,
 * nothing synthesized client-side. */
export class PanelStore {
  state: PanelState;
  private listeners: Array<() => void> = [];

  constructor(banner: string) {
    this.state = initialState(banner);
  }

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  /** Feed entries must arrive in sequence order; duplicates and stale
   * entries are dropped so the feed never reorders. */
  applyEntry(entry: EventEntry): void {
    if (entry.seq <= this.state.lastSeq) return;
    this.state.lastSeq = entry.seq;
    this.state.unfiltered.push(entry);
    if (this.state.topic && messageMentions(entry.message.text, this.state.topic)) {
      this.state.topicFeed.push(entry);
    }
    const geo = entry.message.geo;
    if (geo) {
      const inArea = !this.state.circle || circleContains(this.state.circle, geo);
      if (inArea) {
        this.state.pins.push({ lat: geo.lat, lon: geo.lon, id: entry.message.id });
      }
    }
    this.emit();
  }

  seedFeed(entries: EventEntry[]): void {
    for (const entry of entries) {
      if (entry.seq > this.state.lastSeq) {
        this.state.lastSeq = entry.seq;
        this.state.unfiltered.push(entry);
      }
    }
    this.emit();
  }

  setTrending(entries: TrendingEntry[]): void {
    this.state.trending = entries;
    this.emit();
  }

  selectTopic(topic: string | null, feed: EventEntry[]): void {
    this.state.topic = topic;
    this.state.topicFeed = feed;
    this.emit();
  }

  setCircle(circle: GeoCircle | null): void {
    this.state.circle = circle;
    if (circle) {
      this.state.pins = this.state.pins.filter((p) =>
        circleContains(circle, { lat: p.lat, lon: p.lon }),
      );
    }
    this.emit();
  }

  setPins(pins: MapPin[]): void {
    this.state.pins = pins;
    this.emit();
  }

  setClock(clock: ClockInfo): void {
    this.state.clock = clock;
    this.emit();
  }

  setConnection(status: ConnectionStatus): void {
    this.state.connection = status;
    this.emit();
  }
}
