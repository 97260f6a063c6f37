// Wire types for the exercise stream service API.

export interface GeoPoint {
  lat: number;
  lon: number;
}

export interface Microblog {
  id: number;
  scenario_time: number;
  author: string;
  text: string;
  hashtags: string[];
  visibility: "high" | "medium" | "low";
  source: string;
  geo: GeoPoint | null;
  retweet_of: number | null;
  category: string | null;
}

export interface EventEntry {
  seq: number;
  wall_time: number;
  scenario_time: number;
  kind: "emitted" | "posted" | "retweeted" | "injected" | "ghost_retweet";
  message: Microblog;
}

export interface TrendingEntry {
  topic: string;
  count: number;
  rank: number;
}

export interface ClockInfo {
  scenario_time: number;
  compression: number;
  paused: boolean;
  banner: string;
  last_seq: number;
  pending: number;
  replay_finished: boolean;
}

export interface SessionInfo {
  token: string;
  handle: string;
  kind: "pio" | "ghost" | "citizen" | "controller";
  visibility: "high" | "medium" | "low";
  banner: string;
  clock: ClockInfo;
}

export interface FeedPage {
  entries: EventEntry[];
  next_since: number;
}

export interface MapPin {
  lat: number;
  lon: number;
  id: number;
}

export interface Profile {
  handle: string;
  kind: string;
  visibility: string;
  profile_url: string | null;
}

export interface GeoCircle {
  center: GeoPoint;
  radiusM: number;
}

export const MAX_TEXT_CHARS = 140;
