"""Deterministic exercise fixtures: category table, desk- and full-scale
corpora (manifest, templates, event list, background, roster).

Background topic structure is striped rather than sampled: every 12th
record carries the anchor hashtag and the rest cycle through 22 regional
hashtags, so the sliding-window baseline the volume heuristic reads is
stable across seeds. Template bodies are built from stopwords and short
words so the only trend-relevant token a burst contributes is its own
hashtag.
"""
from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .geo import BoundingBox, GeoPoint
from .model import (
    Account,
    AccountKind,
    CategorySpec,
    CorpusManifest,
    Microblog,
    SourceClass,
    VisibilityLevel,
    canonical_json,
)
from .trends import DEFAULT_STOPWORDS

_REGION = BoundingBox(
    south_west=GeoPoint(lat=39.60, lon=-84.45),
    north_east=GeoPoint(lat=39.95, lon=-84.00),
)
_NATIVE_SPAN_S = 4 * 86400  # four days of simulated collection
_ANCHOR_TAG = "#miamivalley"
_MID_TAGS = [f"#area{i:02d}" for i in range(26)]
_VIS_CYCLE = [VisibilityLevel.HIGH, VisibilityLevel.MEDIUM, VisibilityLevel.LOW]

_OPENERS = ["what was that", "is it over", "did you all see that", "was that it"]
_CLOSERS = ["out there", "over here", "off to the", "on our way"]


def table1_categories() -> list[CategorySpec]:
    """The committed semantic-category table with per-visibility counts."""
    raw = resources.files("drillstream").joinpath("data/categories.json").read_text("utf-8")
    return [CategorySpec.from_dict(d) for d in json.loads(raw)]


def build_category_corpus(
    specs: list[CategorySpec], *, start_id: int = 1, spacing_s: float = 1.0
) -> list[Microblog]:
    """Synthesize a corpus that realizes each category's visibility counts
    exactly. Where a row is internally inconsistent the component sums win
    over the stated total."""
    msgs: list[Microblog] = []
    next_id = start_id
    t = 0.0
    for spec in specs:
        for level, count in (
            (VisibilityLevel.HIGH, spec.high),
            (VisibilityLevel.MEDIUM, spec.medium),
            (VisibilityLevel.LOW, spec.low),
        ):
            for k in range(count):
                msgs.append(
                    Microblog(
                        id=next_id,
                        scenario_time=t,
                        author="fixture",
                        text=f"{spec.name} sample {k}"[:140],
                        visibility=level,
                        source=SourceClass.CONSTRUCTED_GENERIC,
                        category=spec.name,
                    )
                )
                next_id += 1
                t += spacing_s
    return msgs


def _filler_vocabulary(size: int = 800) -> list[str]:
    """Pseudo-words of length >= 5, none colliding with the stopword list.
    Fixed internal seed: the vocabulary is part of the fixture definition."""
    rng = random.Random(990331)
    vocab: list[str] = []
    seen = set()
    while len(vocab) < size:
        word = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(5, 8)))
        if word in seen or word in DEFAULT_STOPWORDS:
            continue
        seen.add(word)
        vocab.append(word)
    return vocab


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    background_count: int
    event_count: int
    templates_per_event: int
    first_event_s: float
    last_event_s: float
    username_pool_size: int = 200
    bg_author_pool_size: int = 300


DESK = FixtureSpec(
    name="desk",
    background_count=2440,
    event_count=8,
    templates_per_event=2,
    first_event_s=300.0,
    last_event_s=500.0,
)

# Sized so the compiled corpus lands near 32k messages over ~4.5 scenario
# hours at ~2 msg/s with a 0.76 background share.
PAPER_SCALE = FixtureSpec(
    name="paper_scale",
    background_count=24250,
    event_count=111,
    templates_per_event=3,
    first_event_s=300.0,
    last_event_s=15700.0,
    username_pool_size=1000,
    bg_author_pool_size=1500,
)


def fixture_manifest(spec: FixtureSpec) -> CorpusManifest:
    return CorpusManifest(
        categories=tuple(table1_categories()),
        username_pool=tuple(f"citizen{i:03d}" for i in range(spec.username_pool_size)),
        bbox=_REGION,
        background_fraction_target=0.76,
    )


def generate_background_records(spec: FixtureSpec, seed: int) -> list[dict]:
    """Time-sorted JSONL-ready records. Tag striping: every 12th record
    carries the anchor tag, the rest cycle through the regional tags, so
    any trend window sees the anchor at 1/12 of its size and each regional
    tag at 11/(12 * 26) of it. That pins the volume baseline (the anchor
    count) and places regional counts between the derived low and medium
    volumes."""
    rng = random.Random(f"bg-{spec.name}-{seed}")
    vocab = _filler_vocabulary()
    times = sorted(rng.randrange(_NATIVE_SPAN_S) for _ in range(spec.background_count))
    records = []
    mid_cursor = 0
    for j, ts in enumerate(times):
        if j % 12 == 0:
            tag = _ANCHOR_TAG
        else:
            tag = _MID_TAGS[mid_cursor % len(_MID_TAGS)]
            mid_cursor += 1
        words = [rng.choice(vocab) for _ in range(3)]
        text = f"{words[0]} {words[1]} {tag} {words[2]}"
        point = _REGION.random_point(rng)
        records.append(
            {
                "ts": ts,
                "user": f"resident{rng.randrange(spec.bg_author_pool_size):04d}",
                "text": text,
                "lat": round(point.lat, 6),
                "lon": round(point.lon, 6),
            }
        )
    return records


def _template_region(index: int) -> BoundingBox:
    """A small deterministic sub-box of the exercise region per template."""
    lat0 = _REGION.south_west.lat
    lon0 = _REGION.south_west.lon
    dlat = _REGION.north_east.lat - lat0
    dlon = _REGION.north_east.lon - lon0
    row = index % 5
    col = (index // 5) % 5
    return BoundingBox(
        south_west=GeoPoint(lat=lat0 + row * dlat / 5, lon=lon0 + col * dlon / 5),
        north_east=GeoPoint(
            lat=lat0 + (row + 1) * dlat / 5, lon=lon0 + (col + 1) * dlon / 5
        ),
    )


def generate_templates_and_msel(
    spec: FixtureSpec, categories: list[CategorySpec]
) -> tuple[list[dict], list[dict]]:
    """Template and event JSONL rows. Burst visibilities cycle
    high/medium/low; every template carries one unique hashtag and
    otherwise only trend-inert words."""
    templates: list[dict] = []
    events: list[dict] = []
    if spec.event_count > 1:
        step = (spec.last_event_s - spec.first_event_s) / (spec.event_count - 1)
    else:
        step = 0.0
    burst_index = 0
    for e in range(spec.event_count):
        t_event = spec.first_event_s + e * step
        refs = []
        for s in range(spec.templates_per_event):
            suffix = string.ascii_lowercase[s]
            tpl_id = f"e{e:03d}{suffix}"
            tag = f"#inject{e:03d}{suffix}"
            visibility = _VIS_CYCLE[burst_index % len(_VIS_CYCLE)]
            category = categories[burst_index % len(categories)].name
            body = (
                f"({_OPENERS[burst_index % len(_OPENERS)]} / "
                f"{_OPENERS[(burst_index + 1) % len(_OPENERS)]}) "
                f"{tag} ({_CLOSERS[burst_index % len(_CLOSERS)]} / "
                f"{_CLOSERS[(burst_index + 2) % len(_CLOSERS)]})"
            )
            templates.append(
                {
                    "id": tpl_id,
                    "category": category,
                    "visibility": visibility.value,
                    "body": body,
                    "msel_event": f"ev{e:03d}" if s == 0 else None,
                    "geo_bbox": _template_region(burst_index).to_dict(),
                }
            )
            refs.append(tpl_id)
            burst_index += 1
        events.append(
            {
                "id": f"ev{e:03d}",
                "t": t_event,
                "description": f"scripted stimulus event {e}",
                "templates": refs,
            }
        )
    return templates, events


def fixture_roster() -> dict:
    accounts = [
        {
            "handle": "pio_city",
            "kind": AccountKind.PIO.value,
            "visibility": VisibilityLevel.HIGH.value,
            "password": "city-pass",
            "profile_url": "https://example.org/profiles/pio_city",
        },
        {
            "handle": "pio_redcross",
            "kind": AccountKind.PIO.value,
            "visibility": VisibilityLevel.MEDIUM.value,
            "password": "redcross-pass",
            "profile_url": "https://example.org/profiles/pio_redcross",
        },
        {
            "handle": "controller_sim",
            "kind": AccountKind.CONTROLLER.value,
            "visibility": VisibilityLevel.HIGH.value,
            "password": "control-pass",
            "profile_url": None,
        },
    ]
    for i in range(1, 13):
        accounts.append(
            {
                "handle": f"ghost{i:02d}",
                "kind": AccountKind.GHOST.value,
                "visibility": VisibilityLevel.LOW.value,
                "password": None,
                "profile_url": None,
            }
        )
    return {"accounts": accounts}


def write_fixture(out_dir: Path, spec: FixtureSpec, seed: int) -> dict[str, Path]:
    """Write manifest.json, templates.jsonl, msel.jsonl, background.jsonl,
    and roster.json; returns the path map."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = fixture_manifest(spec)
    categories = table1_categories()
    templates, events = generate_templates_and_msel(spec, categories)
    background = generate_background_records(spec, seed)
    paths = {
        "manifest": out_dir / "manifest.json",
        "templates": out_dir / "templates.jsonl",
        "msel": out_dir / "msel.jsonl",
        "background": out_dir / "background.jsonl",
        "roster": out_dir / "roster.json",
    }
    paths["manifest"].write_text(
        canonical_json(manifest.to_dict()) + "\n", encoding="utf-8"
    )
    with open(paths["templates"], "w", encoding="utf-8") as fh:
        for t in templates:
            fh.write(json.dumps(t, ensure_ascii=False) + "\n")
    with open(paths["msel"], "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev, ensure_ascii=False) + "\n")
    with open(paths["background"], "w", encoding="utf-8") as fh:
        for rec in background:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    paths["roster"].write_text(
        json.dumps(fixture_roster(), indent=2) + "\n", encoding="utf-8"
    )
    return paths


def fixture_spec(name: str) -> FixtureSpec:
    specs = {"desk": DESK, "paper_scale": PAPER_SCALE}
    if name not in specs:
        raise KeyError(f"unknown fixture scale {name!r}; choose from {sorted(specs)}")
    return specs[name]
