"""Core domain types, corpus ingestion, and category bookkeeping validation.

A corpus is a set of 140-character microblogs with per-message visibility
(high/medium/low), a source class, and optional geolocation. Category specs
carry the expected per-visibility counts; their internal consistency
(total == high + medium + low) is reported, never silently repaired.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import ConfigurationError, EmptyText, Overlength
from .geo import BoundingBox, GeoPoint

MAX_TEXT_CHARS = 140

_HASHTAG_RE = re.compile(r"#\w+")
_HANDLE_RE = re.compile(r"^\S{1,32}$")


class VisibilityLevel(str, Enum):
    """Message prominence tier. Total order: HIGH > MEDIUM > LOW."""

    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @property
    def rank(self) -> int:
        return _VISIBILITY_RANK[self]

    def __lt__(self, other):
        if isinstance(other, VisibilityLevel):
            return self.rank < other.rank
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, VisibilityLevel):
            return self.rank <= other.rank
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, VisibilityLevel):
            return self.rank > other.rank
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, VisibilityLevel):
            return self.rank >= other.rank
        return NotImplemented


_VISIBILITY_RANK = {
    VisibilityLevel.LOW: 1,
    VisibilityLevel.MEDIUM: 2,
    VisibilityLevel.HIGH: 3,
}


class SourceClass(str, Enum):
    BACKGROUND = "background"
    AUTHORITATIVE = "authoritative"
    GHOST_RETWEET = "ghost_retweet"
    CONSTRUCTED_MSEL = "constructed_msel"
    CONSTRUCTED_GENERIC = "constructed_generic"
    CONTROLLER_INJECTION = "controller_injection"


class AccountKind(str, Enum):
    PIO = "pio"
    GHOST = "ghost"
    CITIZEN = "citizen"
    CONTROLLER = "controller"


@dataclass(frozen=True)
class Account:
    handle: str
    kind: AccountKind
    visibility: VisibilityLevel
    profile_url: Optional[str] = None

    def __post_init__(self):
        if not _HANDLE_RE.match(self.handle):
            raise ValueError(
                f"handle {self.handle!r} must be 1-32 chars with no whitespace"
            )

    def to_dict(self) -> dict:
        return {
            "handle": self.handle,
            "kind": self.kind.value,
            "visibility": self.visibility.value,
            "profile_url": self.profile_url,
        }


def extract_hashtags(text: str) -> list[str]:
    """All '#'-prefixed tokens in order of appearance, deduplicated."""
    seen = set()
    tags = []
    for m in _HASHTAG_RE.finditer(text):
        tag = m.group(0)
        if tag not in seen:
            seen.add(tag)
            tags.append(tag)
    return tags


def hashtag_offsets(text: str) -> list[tuple[str, int]]:
    """(tag, start offset) for every hashtag occurrence, duplicates included."""
    return [(m.group(0), m.start()) for m in _HASHTAG_RE.finditer(text)]


def validate_microblog(text: str) -> list[str]:
    """Check the 1-140 character contract and return the hashtag list.

    Raises EmptyText / Overlength; never truncates.
    """
    if len(text) == 0:
        raise EmptyText("message text is empty")
    if len(text) > MAX_TEXT_CHARS:
        raise Overlength(
            f"message text is {len(text)} chars, limit {MAX_TEXT_CHARS}"
        )
    return extract_hashtags(text)


@dataclass(frozen=True)
class Microblog:
    """One message. Hashtags are always derived from the text."""

    id: int
    scenario_time: float
    author: str
    text: str
    visibility: VisibilityLevel
    source: SourceClass
    geo: Optional[GeoPoint] = None
    retweet_of: Optional[int] = None
    category: Optional[str] = None
    hashtags: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        validate_microblog(self.text)
        if self.retweet_of is not None and self.retweet_of >= self.id:
            raise ValueError(
                f"retweet_of {self.retweet_of} must reference an id smaller than {self.id}"
            )
        object.__setattr__(self, "hashtags", tuple(extract_hashtags(self.text)))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "scenario_time": self.scenario_time,
            "author": self.author,
            "text": self.text,
            "hashtags": list(self.hashtags),
            "visibility": self.visibility.value,
            "source": self.source.value,
            "geo": self.geo.to_dict() if self.geo else None,
            "retweet_of": self.retweet_of,
            "category": self.category,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Microblog":
        return cls(
            id=int(d["id"]),
            scenario_time=float(d["scenario_time"]),
            author=d["author"],
            text=d["text"],
            visibility=VisibilityLevel(d["visibility"]),
            source=SourceClass(d["source"]),
            geo=GeoPoint.from_dict(d["geo"]) if d.get("geo") else None,
            retweet_of=d.get("retweet_of"),
            category=d.get("category"),
        )


@dataclass(frozen=True)
class CategorySpec:
    """Expected per-visibility message counts for one semantic category."""

    name: str
    total: int
    high: int = 0
    medium: int = 0
    low: int = 0

    @property
    def component_sum(self) -> int:
        return self.high + self.medium + self.low

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "total": self.total,
            "high": self.high,
            "medium": self.medium,
            "low": self.low,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CategorySpec":
        return cls(
            name=d["name"],
            total=int(d["total"]),
            high=int(d.get("high", 0)),
            medium=int(d.get("medium", 0)),
            low=int(d.get("low", 0)),
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a category consistency check. Never raised, only reported."""

    name: str
    ok: bool
    discrepancy: int  # total - (high + medium + low)


def validate_category_spec(spec: CategorySpec) -> ValidationReport:
    """Check total == high + medium + low.

    Some source tables are internally inconsistent; the report carries the
    signed discrepancy and downstream consumers prefer the component sum.
    """
    for label, count in (
        ("total", spec.total),
        ("high", spec.high),
        ("medium", spec.medium),
        ("low", spec.low),
    ):
        if count < 0 or int(count) != count:
            raise ValueError(f"{spec.name}: {label} count {count} must be a non-negative integer")
    discrepancy = spec.total - spec.component_sum
    return ValidationReport(name=spec.name, ok=discrepancy == 0, discrepancy=discrepancy)


@dataclass(frozen=True)
class CorpusManifest:
    categories: tuple[CategorySpec, ...]
    username_pool: tuple[str, ...]
    bbox: BoundingBox
    background_fraction_target: float = 0.76

    def __post_init__(self):
        if not self.username_pool:
            raise ConfigurationError("username_pool must be non-empty")
        if not 0.0 <= self.background_fraction_target <= 1.0:
            raise ConfigurationError(
                f"background_fraction_target {self.background_fraction_target} outside [0, 1]"
            )
        names = [c.name for c in self.categories]
        if len(names) != len(set(names)):
            raise ConfigurationError("duplicate category names in manifest")

    def category_names(self) -> set[str]:
        return {c.name for c in self.categories}

    def validate_categories(self) -> list[ValidationReport]:
        return [validate_category_spec(c) for c in self.categories]

    def to_dict(self) -> dict:
        return {
            "categories": [c.to_dict() for c in self.categories],
            "background_fraction_target": self.background_fraction_target,
            "username_pool": list(self.username_pool),
            "bbox": self.bbox.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusManifest":
        return cls(
            categories=tuple(CategorySpec.from_dict(c) for c in d["categories"]),
            username_pool=tuple(d["username_pool"]),
            bbox=BoundingBox.from_dict(d["bbox"]),
            background_fraction_target=float(d.get("background_fraction_target", 0.76)),
        )


def canonical_json(obj) -> str:
    """Stable serialization used for digests and byte-compare tests."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def manifest_digest(manifest: CorpusManifest) -> str:
    return hashlib.sha256(canonical_json(manifest.to_dict()).encode("utf-8")).hexdigest()


def load_manifest(path: Union[str, Path]) -> CorpusManifest:
    with open(path, encoding="utf-8") as fh:
        return CorpusManifest.from_dict(json.load(fh))


# --- background ingestion ---------------------------------------------------

@dataclass(frozen=True)
class RejectedRecord:
    line: int
    reason: str


@dataclass
class IngestResult:
    messages: list[Microblog]
    rejected: list[RejectedRecord]


def ingest_background(
    records: Iterable[Union[str, dict]],
    bbox: BoundingBox,
    *,
    keep_ungeotagged: bool = False,
) -> IngestResult:
    """Filter raw background records down to the exercise region.

    Records may be JSON lines or already-parsed dicts with keys
    ``ts`` (seconds), ``user``, ``text`` and optional ``lat``/``lon``.
    Containment is boundary-inclusive. Ungeotagged records are dropped
    unless ``keep_ungeotagged`` is set. Malformed records are rejected
    individually with their 1-based line number; ingestion never aborts.

    Kept messages get visibility LOW and source BACKGROUND; ids are the
    input line numbers (the compiler renumbers when it builds a plan).
    """
    kept: list[Microblog] = []
    rejected: list[RejectedRecord] = []
    for line_no, raw in enumerate(records, start=1):
        try:
            if isinstance(raw, str):
                stripped = raw.strip()
                if not stripped:
                    continue
                record = json.loads(stripped)
            else:
                record = raw
            if not isinstance(record, dict):
                raise ValueError("record is not a JSON object")
            ts = record["ts"]
            user = record["user"]
            text = record["text"]
            if not isinstance(user, str) or not user:
                raise ValueError("missing or empty 'user'")
            validate_microblog(text)
            geo = None
            if record.get("lat") is not None or record.get("lon") is not None:
                geo = GeoPoint(lat=float(record["lat"]), lon=float(record["lon"]))
        except (KeyError, ValueError, TypeError, EmptyText, Overlength) as exc:
            rejected.append(RejectedRecord(line=line_no, reason=str(exc) or type(exc).__name__))
            continue
        if geo is None:
            if not keep_ungeotagged:
                continue
        elif not bbox.contains(geo):
            continue
        kept.append(
            Microblog(
                id=line_no,
                scenario_time=float(ts),
                author=user,
                text=text,
                visibility=VisibilityLevel.LOW,
                source=SourceClass.BACKGROUND,
                geo=geo,
            )
        )
    return IngestResult(messages=kept, rejected=rejected)


def load_background(path: Union[str, Path], bbox: BoundingBox, **kwargs) -> IngestResult:
    with open(path, encoding="utf-8") as fh:
        return ingest_background(fh, bbox, **kwargs)


def assign_author(msg: Microblog, pool: Sequence[str], rng: random.Random) -> Microblog:
    """Return a copy of msg with an author drawn uniformly from the pool."""
    if not pool:
        raise ConfigurationError("author pool is empty")
    return dataclasses.replace(msg, author=rng.choice(pool))
