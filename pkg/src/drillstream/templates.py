"""Parameterized microblog templates: parsing, expansion, rewrite rules.

Surface syntax: alternation groups are parenthesized, options separated by
`` / `` (space-slash-space), e.g. ``(kids loved / we enjoyed) the show``.
A backslash escapes the next character, so literal parentheses are written
``\\(`` and ``\\)``. Groups do not nest.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .errors import ConfigurationError, EmptyText, ExpansionOverlength, ParseError
from .geo import BoundingBox
from .model import MAX_TEXT_CHARS, VisibilityLevel

_SEPARATOR = " / "


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class AlternationGroup:
    options: tuple[str, ...]
    span: tuple[int, int]  # [start, end) char offsets of the group in the source

    def __post_init__(self):
        if len(self.options) < 2:
            raise ValueError("alternation group needs at least 2 options")
        if any(not opt for opt in self.options):
            raise ValueError("alternation group options must be non-empty")


Segment = Union[Literal, AlternationGroup]


@dataclass(frozen=True)
class Template:
    category: str
    visibility: VisibilityLevel
    segments: tuple[Segment, ...]
    source: str
    id: Optional[str] = None
    msel_event: Optional[str] = None
    geo_region: Optional[BoundingBox] = None
    max_variants: Optional[int] = None

    @property
    def groups(self) -> list[AlternationGroup]:
        return [s for s in self.segments if isinstance(s, AlternationGroup)]

    def variant_count(self) -> int:
        n = 1
        for g in self.groups:
            n *= len(g.options)
        return n

    def first_hashtag(self) -> Optional[str]:
        """Case-folded first hashtag over any variant; used as the burst topic."""
        m = re.search(r"#\w+", self.source)
        return m.group(0).casefold() if m else None


@dataclass(frozen=True)
class RewriteRule:
    pattern: str
    replacement: str
    case_insensitive: bool = False

    def __post_init__(self):
        if not self.pattern:
            raise ConfigurationError("rewrite rule pattern must be non-empty")


@dataclass(frozen=True)
class MessageDraft:
    """An expanded variant before scheduling: no id, author, or time yet."""

    text: str
    category: str
    visibility: VisibilityLevel
    option_indices: tuple[int, ...]
    msel_event: Optional[str] = None
    geo_region: Optional[BoundingBox] = None


def parse_template_body(src: str) -> tuple[Segment, ...]:
    """Parse template source into literal and alternation segments."""
    segments: list[Segment] = []
    buf: list[str] = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\\" and i + 1 < n:
            buf.append(src[i + 1])
            i += 2
            continue
        if c == ")":
            raise ParseError("unmatched ')'", i)
        if c == "(":
            if buf:
                segments.append(Literal("".join(buf)))
                buf = []
            group, i = _parse_group(src, i)
            segments.append(group)
            continue
        buf.append(c)
        i += 1
    if buf or not segments:
        segments.append(Literal("".join(buf)))
    return tuple(segments)


def _parse_group(src: str, open_at: int) -> tuple[AlternationGroup, int]:
    options: list[str] = []
    buf: list[str] = []
    i = open_at + 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\\" and i + 1 < n:
            buf.append(src[i + 1])
            i += 2
            continue
        if c == "(":
            raise ParseError("nested group", i)
        if c == ")":
            options.append("".join(buf))
            if len(options) < 2:
                raise ParseError("group needs at least 2 options", open_at)
            if any(not opt for opt in options):
                raise ParseError("empty option in group", open_at)
            return AlternationGroup(tuple(options), (open_at, i + 1)), i + 1
        if src.startswith(_SEPARATOR, i):
            options.append("".join(buf))
            buf = []
            i += len(_SEPARATOR)
            continue
        buf.append(c)
        i += 1
    raise ParseError("unterminated group", open_at)


def parse_template(
    src: str,
    *,
    category: str,
    visibility: VisibilityLevel,
    id: Optional[str] = None,
    msel_event: Optional[str] = None,
    geo_region: Optional[BoundingBox] = None,
    max_variants: Optional[int] = None,
) -> Template:
    return Template(
        category=category,
        visibility=visibility,
        segments=parse_template_body(src),
        source=src,
        id=id,
        msel_event=msel_event,
        geo_region=geo_region,
        max_variants=max_variants,
    )


def expand_template(t: Template) -> list[MessageDraft]:
    """Enumerate every variant, in lexicographic order of option indices.

    The whole expansion fails if any variant renders outside 1-140 chars.
    """
    groups = t.groups
    index_ranges = [range(len(g.options)) for g in groups]
    drafts: list[MessageDraft] = []
    for combo in itertools.product(*index_ranges):
        choice = iter(combo)
        parts: list[str] = []
        for seg in t.segments:
            if isinstance(seg, Literal):
                parts.append(seg.text)
            else:
                parts.append(seg.options[next(choice)])
        text = "".join(parts)
        if len(text) > MAX_TEXT_CHARS:
            raise ExpansionOverlength(
                f"variant renders to {len(text)} chars, limit {MAX_TEXT_CHARS}", combo
            )
        if not text:
            raise EmptyText(f"template {t.id or t.source!r} renders to empty text")
        drafts.append(
            MessageDraft(
                text=text,
                category=t.category,
                visibility=t.visibility,
                option_indices=combo,
                msel_event=t.msel_event,
                geo_region=t.geo_region,
            )
        )
    return drafts


def apply_rewrite_rules(text: str, rules: list[RewriteRule]) -> str:
    """Apply rules in list order; each rule runs one leftmost,
    non-overlapping pass over the previous rule's output."""
    for rule in rules:
        if rule.case_insensitive:
            pattern = re.compile(re.escape(rule.pattern), re.IGNORECASE)
            text = pattern.sub(lambda _m: rule.replacement, text)
        else:
            text = text.replace(rule.pattern, rule.replacement)
    return text


# --- file formats -----------------------------------------------------------

def load_templates(path: Union[str, Path]) -> list[Template]:
    """Template file: JSON lines with category, visibility, body and
    optional id, msel_event, geo_bbox, max_variants. Missing ids default
    to t<line number>."""
    templates: list[Template] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            geo_region = BoundingBox.from_dict(d["geo_bbox"]) if d.get("geo_bbox") else None
            templates.append(
                parse_template(
                    d["body"],
                    category=d["category"],
                    visibility=VisibilityLevel(d["visibility"]),
                    id=d.get("id") or f"t{line_no}",
                    msel_event=d.get("msel_event"),
                    geo_region=geo_region,
                    max_variants=d.get("max_variants"),
                )
            )
    ids = [t.id for t in templates]
    if len(ids) != len(set(ids)):
        raise ConfigurationError("duplicate template ids")
    return templates


def template_to_dict(t: Template) -> dict:
    return {
        "id": t.id,
        "category": t.category,
        "visibility": t.visibility.value,
        "body": t.source,
        "msel_event": t.msel_event,
        "geo_bbox": t.geo_region.to_dict() if t.geo_region else None,
        "max_variants": t.max_variants,
    }


def load_rewrite_rules(path: Union[str, Path]) -> list[RewriteRule]:
    """Rewrite-rule file: JSON lines {pattern, replacement, ci?}."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            rules.append(
                RewriteRule(
                    pattern=d["pattern"],
                    replacement=d["replacement"],
                    case_insensitive=bool(d.get("ci", False)),
                )
            )
    return rules
