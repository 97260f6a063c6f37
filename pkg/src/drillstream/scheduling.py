"""Schedule compilation: templates + event list + background -> timed plan.

Burst volumes come from the trending baseline: the count of the topmost
trending topic in the sliding window over the plan built so far is the
high-visibility volume; medium and low are fixed fractions of it (floored,
clamped so low <= medium <= high). Each burst spreads its messages
uniformly at random over the burst window following the event time.

Compilation threads a single seeded RNG in a fixed traversal order
(events in list order; per template: variant subsample if capped, burst
times, then per message author and geo), so identical inputs and seed
give a byte-identical plan.
"""
from __future__ import annotations

import dataclasses
import heapq
import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import CompileError, ConfigurationError
from .model import (
    MAX_TEXT_CHARS,
    Account,
    CorpusManifest,
    Microblog,
    SourceClass,
    VisibilityLevel,
    canonical_json,
    manifest_digest,
)
from .templates import MessageDraft, Template, expand_template
from .trends import TopicWindow

_ELLIPSIS = "…"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**6)
    raise ConfigurationError(f"cannot interpret ratio {value!r}")


@dataclass(frozen=True)
class GhostRetweetPolicy:
    """How many ghost accounts retweet an authoritative message, and over
    how long, by the message's visibility. The numbers are configuration,
    not measured values."""

    count_by_visibility: dict = field(
        default_factory=lambda: {
            VisibilityLevel.HIGH: 9,
            VisibilityLevel.MEDIUM: 4,
            VisibilityLevel.LOW: 1,
        }
    )
    duration_by_visibility: dict = field(
        default_factory=lambda: {
            VisibilityLevel.HIGH: 600.0,
            VisibilityLevel.MEDIUM: 300.0,
            VisibilityLevel.LOW: 120.0,
        }
    )

    def __post_init__(self):
        for level in VisibilityLevel:
            if self.count_by_visibility.get(level, 0) < 0:
                raise ConfigurationError("ghost retweet counts must be >= 0")
            if self.duration_by_visibility.get(level, 1.0) <= 0:
                raise ConfigurationError("ghost retweet durations must be > 0")

    def to_dict(self) -> dict:
        return {
            "counts": {lv.value: self.count_by_visibility[lv] for lv in VisibilityLevel},
            "durations": {lv.value: self.duration_by_visibility[lv] for lv in VisibilityLevel},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GhostRetweetPolicy":
        return cls(
            count_by_visibility={lv: int(d["counts"][lv.value]) for lv in VisibilityLevel},
            duration_by_visibility={lv: float(d["durations"][lv.value]) for lv in VisibilityLevel},
        )


@dataclass(frozen=True)
class VolumePolicy:
    """Parameters of the visibility-volume heuristic.

    Ratios are exact fractions so floored volumes never suffer float
    round-off (12 * 1/3 must be 4, not 3.999...).
    """

    trend_window_s: float = 300.0
    burst_window_s: float = 300.0
    medium_ratio: Fraction = Fraction(1, 2)
    low_ratio: Fraction = Fraction(1, 3)
    min_volume: int = 1
    retweet_policy: GhostRetweetPolicy = field(default_factory=GhostRetweetPolicy)

    def __post_init__(self):
        object.__setattr__(self, "medium_ratio", _as_fraction(self.medium_ratio))
        object.__setattr__(self, "low_ratio", _as_fraction(self.low_ratio))
        if not 0 < self.low_ratio <= self.medium_ratio <= 1:
            raise ConfigurationError("need 0 < low_ratio <= medium_ratio <= 1")
        if self.burst_window_s <= 0 or self.trend_window_s <= 0:
            raise ConfigurationError("windows must be positive")
        if self.min_volume < 0:
            raise ConfigurationError("min_volume must be >= 0")

    def to_dict(self) -> dict:
        return {
            "trend_window_s": self.trend_window_s,
            "burst_window_s": self.burst_window_s,
            "medium_ratio": str(self.medium_ratio),
            "low_ratio": str(self.low_ratio),
            "min_volume": self.min_volume,
            "retweet_policy": self.retweet_policy.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VolumePolicy":
        return cls(
            trend_window_s=float(d["trend_window_s"]),
            burst_window_s=float(d["burst_window_s"]),
            medium_ratio=Fraction(d["medium_ratio"]),
            low_ratio=Fraction(d["low_ratio"]),
            min_volume=int(d["min_volume"]),
            retweet_policy=GhostRetweetPolicy.from_dict(d["retweet_policy"]),
        )


@dataclass(frozen=True)
class MSELEvent:
    id: str
    scenario_time: float
    description: str
    template_refs: tuple[str, ...]

    def __post_init__(self):
        if self.scenario_time < 0:
            raise ConfigurationError(f"event {self.id} has negative scenario_time")


@dataclass(frozen=True)
class ScheduledMessage:
    emit_time: float
    payload: Microblog

    def __post_init__(self):
        if self.emit_time < 0:
            raise ValueError("emit_time must be >= 0")

    def to_dict(self) -> dict:
        return {"emit_time": self.emit_time, "message": self.payload.to_dict()}


@dataclass(frozen=True)
class SchedulePlan:
    messages: tuple[ScheduledMessage, ...]
    manifest: CorpusManifest
    seed: int
    policy: VolumePolicy
    span: float


@dataclass(frozen=True)
class BurstRecord:
    """One template's scheduled burst: where it landed and why."""

    event_id: str
    template_id: str
    topic: Optional[str]
    visibility: VisibilityLevel
    start: float
    window_s: float
    volume: int
    baseline: int
    message_ids: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "template_id": self.template_id,
            "topic": self.topic,
            "visibility": self.visibility.value,
            "start": self.start,
            "window_s": self.window_s,
            "volume": self.volume,
            "baseline": self.baseline,
            "message_ids": list(self.message_ids),
        }


@dataclass
class CompileReport:
    total: int
    background_count: int
    constructed_count: int
    background_fraction: float
    span: float
    seed: int
    per_category: dict[str, dict[str, int]]
    by_source: dict[str, int]
    bursts: list[BurstRecord]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "background_count": self.background_count,
            "constructed_count": self.constructed_count,
            "background_fraction": self.background_fraction,
            "span": self.span,
            "seed": self.seed,
            "per_category": self.per_category,
            "by_source": self.by_source,
            "bursts": [b.to_dict() for b in self.bursts],
        }


def visibility_volumes(high_count: int, policy: VolumePolicy) -> tuple[int, int, int]:
    """(high, medium, low) burst volumes for a trending baseline.

    Medium and low are floored fractions of the baseline, raised to
    min_volume, then clamped so low <= medium <= high holds.
    """
    if high_count < 0:
        raise ValueError("baseline must be >= 0")
    if high_count == 0:
        return (0, 0, 0)

    def scaled(ratio: Fraction) -> int:
        return (high_count * ratio.numerator) // ratio.denominator

    medium = max(policy.min_volume, scaled(policy.medium_ratio))
    low = max(policy.min_volume, scaled(policy.low_ratio))
    medium = min(medium, high_count)
    low = min(low, medium)
    return (high_count, medium, low)


def baseline_volume(window: TopicWindow) -> int:
    return window.topmost_count()


def schedule_burst(t0: float, n: int, window_s: float, rng: random.Random) -> list[float]:
    """n emit times drawn independently uniform on [t0, t0 + window_s), sorted."""
    if n < 0:
        raise ValueError("burst size must be >= 0")
    if window_s <= 0:
        raise ValueError("burst window must be > 0")
    return sorted(t0 + rng.random() * window_s for _ in range(n))


def retweet_text(original_author: str, original_text: str) -> str:
    text = f"RT @{original_author}: {original_text}"
    if len(text) > MAX_TEXT_CHARS:
        text = text[: MAX_TEXT_CHARS - 1] + _ELLIPSIS
    return text


def generate_ghost_retweets(
    msg: Microblog,
    policy: GhostRetweetPolicy,
    ghosts: Sequence[Account],
    rng: random.Random,
) -> list[ScheduledMessage]:
    """Schedule ghost-account retweets of an authoritative or injected
    message: count and spread depend on the message's visibility. Ghost
    authors are sampled without replacement, falling back to replacement
    when the pool is smaller than the count. Provisional ids follow the
    parent; the emitter renumbers on emission."""
    count = policy.count_by_visibility[msg.visibility]
    if count == 0:
        return []
    if not ghosts:
        raise ConfigurationError("ghost account pool is empty but retweets are required")
    ghosts = list(ghosts)
    if count <= len(ghosts):
        authors = rng.sample(ghosts, count)
    else:
        authors = rng.choices(ghosts, k=count)
    times = schedule_burst(
        msg.scenario_time, count, policy.duration_by_visibility[msg.visibility], rng
    )
    out = []
    for i, (t, ghost) in enumerate(zip(times, authors)):
        out.append(
            ScheduledMessage(
                emit_time=t,
                payload=Microblog(
                    id=msg.id + 1 + i,
                    scenario_time=t,
                    author=ghost.handle,
                    text=retweet_text(msg.author, msg.text),
                    visibility=ghost.visibility,
                    source=SourceClass.GHOST_RETWEET,
                    retweet_of=msg.id,
                ),
            )
        )
    return out


def compile_plan(
    manifest: CorpusManifest,
    templates: Sequence[Template],
    msel: Sequence[MSELEvent],
    background: Sequence[Microblog],
    policy: VolumePolicy,
    seed: int,
    *,
    span: Optional[float] = None,
    fraction_tolerance: Optional[float] = 0.01,
) -> tuple[SchedulePlan, CompileReport]:
    """Build the master schedule.

    Background keeps its native relative timing, affinely rescaled onto the
    exercise span (last event time + burst window, unless ``span`` is given;
    with no events the native span is kept as-is). Each event's templates
    burst at the event time with volumes from the trending baseline, which
    is warm-started by feeding the plan built so far through the window in
    time order. When the window is empty at an event (baseline 0), every
    level falls back to min_volume so early events still emit.

    The achieved background fraction is checked against the manifest target
    when the plan contains constructed messages and ``fraction_tolerance``
    is not None; the share of the stream that is background is a property
    of the stimulus design (event count, template visibilities, background
    density), so a miss is a design error worth failing loudly on.
    """
    by_id: dict[str, Template] = {}
    for t in templates:
        if t.id is None:
            raise CompileError("templates must carry ids for event references")
        if t.id in by_id:
            raise CompileError(f"duplicate template id {t.id}")
        by_id[t.id] = t
    known_categories = manifest.category_names()
    for t in templates:
        if t.category not in known_categories:
            raise CompileError(f"template {t.id} category {t.category!r} not in manifest")
    for a, b in zip(msel, msel[1:]):
        if b.scenario_time < a.scenario_time:
            raise CompileError("msel events must be sorted by scenario_time")
    for ev in msel:
        for ref in ev.template_refs:
            if ref not in by_id:
                raise CompileError(f"event {ev.id} references unknown template {ref!r}")

    rescale_to_span = bool(msel) or span is not None
    if span is None:
        if msel:
            span = msel[-1].scenario_time + policy.burst_window_s
        elif background:
            times = [m.scenario_time for m in background]
            span = max(times) - min(times)
        else:
            span = 0.0

    bg_scheduled: list[ScheduledMessage] = []
    if background:
        tmin = min(m.scenario_time for m in background)
        tmax = max(m.scenario_time for m in background)
        if rescale_to_span and tmax > tmin:
            scale = span / (tmax - tmin)
        else:
            scale = 1.0
        bg_scheduled = sorted(
            (
                ScheduledMessage(
                    emit_time=(m.scenario_time - tmin) * scale, payload=m
                )
                for m in background
            ),
            key=lambda s: s.emit_time,
        )

    rng = random.Random(seed)
    window = TopicWindow(policy.trend_window_s)
    pending: list[tuple[float, int, str]] = []  # constructed feed, min-heap
    tiebreak = itertools.count()
    provisional = itertools.count(start=1_000_000_000)
    bg_cursor = 0

    def feed_until(t: float) -> None:
        nonlocal bg_cursor
        inf = float("inf")
        while True:
            bg_time = bg_scheduled[bg_cursor].emit_time if bg_cursor < len(bg_scheduled) else inf
            c_time = pending[0][0] if pending else inf
            nxt = min(bg_time, c_time)
            if nxt > t:
                return
            if bg_time <= c_time:
                window.observe_text(bg_time, bg_scheduled[bg_cursor].payload.text)
                bg_cursor += 1
            else:
                c_t, _, text = heapq.heappop(pending)
                window.observe_text(c_t, text)

    expanded: dict[str, list[MessageDraft]] = {}
    constructed: list[ScheduledMessage] = []
    bursts: list[BurstRecord] = []
    burst_members: list[list[int]] = []  # provisional ids per burst

    for ev in msel:
        feed_until(ev.scenario_time)
        baseline = window.topmost_count()
        vols = visibility_volumes(baseline, policy)
        vol_by_level = {
            VisibilityLevel.HIGH: vols[0],
            VisibilityLevel.MEDIUM: vols[1],
            VisibilityLevel.LOW: vols[2],
        }
        for ref in ev.template_refs:
            tpl = by_id[ref]
            if ref not in expanded:
                variants = expand_template(tpl)
                if tpl.max_variants is not None and 0 < tpl.max_variants < len(variants):
                    variants = rng.sample(variants, tpl.max_variants)
                expanded[ref] = variants
            variants = expanded[ref]
            n = vol_by_level[tpl.visibility] if baseline > 0 else policy.min_volume
            times = schedule_burst(ev.scenario_time, n, policy.burst_window_s, rng)
            members: list[int] = []
            for i, t_emit in enumerate(times):
                draft = variants[i % len(variants)]
                author = rng.choice(manifest.username_pool)
                geo = tpl.geo_region.random_point(rng) if tpl.geo_region else None
                pid = next(provisional)
                msg = Microblog(
                    id=pid,
                    scenario_time=t_emit,
                    author=author,
                    text=draft.text,
                    visibility=tpl.visibility,
                    source=(
                        SourceClass.CONSTRUCTED_MSEL
                        if tpl.msel_event
                        else SourceClass.CONSTRUCTED_GENERIC
                    ),
                    geo=geo,
                    category=tpl.category,
                )
                constructed.append(ScheduledMessage(emit_time=t_emit, payload=msg))
                heapq.heappush(pending, (t_emit, next(tiebreak), draft.text))
                members.append(pid)
            bursts.append(
                BurstRecord(
                    event_id=ev.id,
                    template_id=ref,
                    topic=tpl.first_hashtag(),
                    visibility=tpl.visibility,
                    start=ev.scenario_time,
                    window_s=policy.burst_window_s,
                    volume=n,
                    baseline=baseline,
                )
            )
            burst_members.append(members)

    merged = bg_scheduled + constructed
    merged.sort(key=lambda s: s.emit_time)
    final_id: dict[int, int] = {}
    messages: list[ScheduledMessage] = []
    for new_id, sched in enumerate(merged, start=1):
        final_id[sched.payload.id] = new_id
        messages.append(
            ScheduledMessage(
                emit_time=sched.emit_time,
                payload=dataclasses.replace(
                    sched.payload, id=new_id, scenario_time=sched.emit_time
                ),
            )
        )
    bursts = [
        dataclasses.replace(
            b, message_ids=tuple(final_id[p] for p in members)
        )
        for b, members in zip(bursts, burst_members)
    ]

    n_bg = len(bg_scheduled)
    n_c = len(constructed)
    total = n_bg + n_c
    fraction = n_bg / total if total else 0.0
    if n_c and fraction_tolerance is not None:
        if abs(fraction - manifest.background_fraction_target) > fraction_tolerance:
            raise CompileError(
                f"background fraction {fraction:.4f} misses target "
                f"{manifest.background_fraction_target:.4f} by more than "
                f"{fraction_tolerance}; adjust event volume or background density"
            )

    per_category: dict[str, dict[str, int]] = {}
    by_source: dict[str, int] = {}
    for sched in messages:
        m = sched.payload
        by_source[m.source.value] = by_source.get(m.source.value, 0) + 1
        if m.category:
            row = per_category.setdefault(
                m.category, {"high": 0, "medium": 0, "low": 0}
            )
            row[m.visibility.value] += 1

    plan = SchedulePlan(
        messages=tuple(messages), manifest=manifest, seed=seed, policy=policy, span=span
    )
    report = CompileReport(
        total=total,
        background_count=n_bg,
        constructed_count=n_c,
        background_fraction=fraction,
        span=span,
        seed=seed,
        per_category=per_category,
        by_source=by_source,
        bursts=bursts,
    )
    return plan, report


def measure_burst_trending(
    plan: SchedulePlan, bursts: Sequence[BurstRecord], k: int = 20
) -> list[bool]:
    """Whether each burst's topic reached the top-k trending list during its
    burst window. The probe evaluates at the burst's own message arrivals
    (the moments its rank can improve) while replaying the whole plan
    through a fresh window."""
    window = TopicWindow(plan.policy.trend_window_s)
    owner: dict[int, int] = {}
    for idx, b in enumerate(bursts):
        for mid in b.message_ids:
            owner[mid] = idx
    hits = [False] * len(bursts)
    for sched in plan.messages:
        window.observe_text(sched.emit_time, sched.payload.text)
        idx = owner.get(sched.payload.id)
        if idx is None or hits[idx]:
            continue
        topic = bursts[idx].topic
        if topic and window.topic_in_top_k(topic, k):
            hits[idx] = True
    return hits


# --- file formats -----------------------------------------------------------

def load_msel(path: Union[str, Path]) -> list[MSELEvent]:
    """MSEL file: JSON lines {id, t, description, templates: [...]}."""
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            events.append(
                MSELEvent(
                    id=d["id"],
                    scenario_time=float(d["t"]),
                    description=d.get("description", ""),
                    template_refs=tuple(d.get("templates", ())),
                )
            )
    return events


def msel_event_to_dict(ev: MSELEvent) -> dict:
    return {
        "id": ev.id,
        "t": ev.scenario_time,
        "description": ev.description,
        "templates": list(ev.template_refs),
    }


def plan_to_dict(plan: SchedulePlan) -> dict:
    return {
        "header": {
            "seed": plan.seed,
            "span": plan.span,
            "policy": plan.policy.to_dict(),
            "manifest_digest": manifest_digest(plan.manifest),
        },
        "manifest": plan.manifest.to_dict(),
        "messages": [s.to_dict() for s in plan.messages],
    }


def save_plan(plan: SchedulePlan, path: Union[str, Path]) -> None:
    Path(path).write_text(canonical_json(plan_to_dict(plan)) + "\n", encoding="utf-8")


def load_plan(path: Union[str, Path]) -> SchedulePlan:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    manifest = CorpusManifest.from_dict(d["manifest"])
    digest = manifest_digest(manifest)
    if digest != d["header"]["manifest_digest"]:
        raise ConfigurationError("plan manifest digest mismatch")
    messages = tuple(
        ScheduledMessage(
            emit_time=float(s["emit_time"]), payload=Microblog.from_dict(s["message"])
        )
        for s in d["messages"]
    )
    for a, b in zip(messages, messages[1:]):
        if b.emit_time < a.emit_time:
            raise ConfigurationError("plan messages are not sorted by emit_time")
    ids = [s.payload.id for s in messages]
    if len(ids) != len(set(ids)):
        raise ConfigurationError("plan message ids are not unique")
    return SchedulePlan(
        messages=messages,
        manifest=manifest,
        seed=int(d["header"]["seed"]),
        policy=VolumePolicy.from_dict(d["header"]["policy"]),
        span=float(d["header"]["span"]),
    )
