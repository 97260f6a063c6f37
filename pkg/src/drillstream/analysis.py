"""After-action analysis over the event log: retweet network, corpus
composition, and per-account engagement."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .eventlog import EventKind, EventLogEntry
from .model import Microblog, SourceClass
from .scheduling import SchedulePlan

_RETWEET_KINDS = {EventKind.RETWEETED, EventKind.GHOST_RETWEET}


@dataclass(frozen=True)
class RetweetEdge:
    source: str  # retweeter
    target: str  # original author
    weight: int


@dataclass
class NetworkReport:
    edges: list[RetweetEdge]
    self_retweets: int
    dangling: list[int]  # message ids whose retweet_of did not resolve

    def to_dict(self) -> dict:
        return {
            "edges": [
                {"from": e.source, "to": e.target, "weight": e.weight}
                for e in self.edges
            ],
            "self_retweets": self.self_retweets,
            "dangling": self.dangling,
        }


def build_retweet_network(
    entries: Sequence[EventLogEntry], *, humans_only: bool = False
) -> NetworkReport:
    """Aggregate (retweeter -> original author) edges. Chains resolve to the
    immediate parent's author. Self-edges are excluded from the edge list
    and counted separately; unresolvable parents are reported and skipped.
    ``humans_only`` drops ghost retweets, leaving only participant actions."""
    by_id: dict[int, Microblog] = {}
    for entry in entries:
        by_id[entry.message.id] = entry.message
    weights: dict[tuple[str, str], int] = defaultdict(int)
    self_retweets = 0
    dangling: list[int] = []
    for entry in entries:
        if entry.kind not in _RETWEET_KINDS:
            continue
        if humans_only and entry.kind == EventKind.GHOST_RETWEET:
            continue
        msg = entry.message
        if msg.retweet_of is None:
            continue
        parent = by_id.get(msg.retweet_of)
        if parent is None:
            dangling.append(msg.id)
            continue
        if parent.author == msg.author:
            self_retweets += 1
            continue
        weights[(msg.author, parent.author)] += 1
    edges = [
        RetweetEdge(source=s, target=t, weight=w)
        for (s, t), w in sorted(weights.items())
    ]
    return NetworkReport(edges=edges, self_retweets=self_retweets, dangling=dangling)


def edge_list_lines(report: NetworkReport) -> list[str]:
    """Tab-separated from/to/weight lines for graph tools."""
    return [f"{e.source}\t{e.target}\t{e.weight}" for e in report.edges]


@dataclass
class CompositionReport:
    total: int
    by_source: dict[str, int]
    source_fractions: dict[str, float]
    background_fraction: float
    by_category: dict[str, dict[str, int]]
    by_visibility: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "by_source": self.by_source,
            "source_fractions": self.source_fractions,
            "background_fraction": self.background_fraction,
            "by_category": self.by_category,
            "by_visibility": self.by_visibility,
        }


def composition_report(messages: Iterable[Microblog]) -> CompositionReport:
    """Counts by source class, by category (split high/medium/low), and by
    visibility, plus the achieved background fraction."""
    by_source: dict[str, int] = defaultdict(int)
    by_visibility: dict[str, int] = defaultdict(int)
    by_category: dict[str, dict[str, int]] = {}
    total = 0
    for msg in messages:
        total += 1
        by_source[msg.source.value] += 1
        by_visibility[msg.visibility.value] += 1
        if msg.category:
            row = by_category.setdefault(
                msg.category, {"high": 0, "medium": 0, "low": 0, "total": 0}
            )
            row[msg.visibility.value] += 1
            row["total"] += 1
    fractions = {
        src: count / total for src, count in by_source.items()
    } if total else {}
    return CompositionReport(
        total=total,
        by_source=dict(by_source),
        source_fractions=fractions,
        background_fraction=fractions.get(SourceClass.BACKGROUND.value, 0.0),
        by_category=by_category,
        by_visibility=dict(by_visibility),
    )


def plan_messages(plan: SchedulePlan) -> list[Microblog]:
    return [s.payload for s in plan.messages]


def log_messages(entries: Iterable[EventLogEntry]) -> list[Microblog]:
    return [e.message for e in entries]


@dataclass
class EngagementStats:
    handle: str
    message_count: int
    mean_interval_s: Optional[float]
    retweets_received: int

    def to_dict(self) -> dict:
        return {
            "handle": self.handle,
            "message_count": self.message_count,
            "mean_interval_s": self.mean_interval_s,
            "retweets_received": self.retweets_received,
        }


def engagement_report(entries: Sequence[EventLogEntry]) -> dict[str, EngagementStats]:
    """Per-account activity: message count, mean gap between consecutive
    messages in scenario time (absent below 2 messages), and retweets of
    that account's messages by anyone."""
    times: dict[str, list[float]] = defaultdict(list)
    by_id: dict[int, Microblog] = {}
    received: dict[str, int] = defaultdict(int)
    for entry in entries:
        msg = entry.message
        by_id[msg.id] = msg
        times[msg.author].append(msg.scenario_time)
    for entry in entries:
        msg = entry.message
        if msg.retweet_of is None:
            continue
        parent = by_id.get(msg.retweet_of)
        if parent is not None:
            received[parent.author] += 1
    report: dict[str, EngagementStats] = {}
    for handle, ts in times.items():
        ts.sort()
        if len(ts) >= 2:
            mean_interval = (ts[-1] - ts[0]) / (len(ts) - 1)
        else:
            mean_interval = None
        report[handle] = EngagementStats(
            handle=handle,
            message_count=len(ts),
            mean_interval_s=mean_interval,
            retweets_received=received.get(handle, 0),
        )
    return report
