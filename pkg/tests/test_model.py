import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drillstream.errors import ConfigurationError, EmptyText, Overlength
from drillstream.geo import BoundingBox, GeoCircle, GeoPoint, haversine_m
from drillstream.model import (
    Account,
    AccountKind,
    CategorySpec,
    CorpusManifest,
    Microblog,
    SourceClass,
    VisibilityLevel,
    assign_author,
    extract_hashtags,
    hashtag_offsets,
    ingest_background,
    load_manifest,
    manifest_digest,
    validate_category_spec,
    validate_microblog,
)

BBOX = BoundingBox(
    south_west=GeoPoint(lat=39.0, lon=-85.0), north_east=GeoPoint(lat=40.0, lon=-84.0)
)


def make_msg(text="hello world", **kw):
    defaults = dict(
        id=1,
        scenario_time=0.0,
        author="user1",
        text=text,
        visibility=VisibilityLevel.LOW,
        source=SourceClass.BACKGROUND,
    )
    defaults.update(kw)
    return Microblog(**defaults)


# --- visibility ordering ------------------------------------------------------

def test_visibility_total_order():
    assert VisibilityLevel.HIGH > VisibilityLevel.MEDIUM > VisibilityLevel.LOW
    assert VisibilityLevel.LOW < VisibilityLevel.HIGH
    assert sorted(VisibilityLevel, reverse=True) == [
        VisibilityLevel.HIGH,
        VisibilityLevel.MEDIUM,
        VisibilityLevel.LOW,
    ]


# --- geo ----------------------------------------------------------------------

def test_geopoint_range_checked():
    GeoPoint(lat=90, lon=180)
    GeoPoint(lat=-90, lon=-180)
    with pytest.raises(ValueError):
        GeoPoint(lat=90.1, lon=0)
    with pytest.raises(ValueError):
        GeoPoint(lat=0, lon=-180.5)


def test_bbox_rejects_inverted_and_antimeridian():
    with pytest.raises(ValueError):
        BoundingBox(south_west=GeoPoint(lat=41, lon=-85), north_east=GeoPoint(lat=40, lon=-84))
    # a box "crossing" the antimeridian would need west lon > east lon
    with pytest.raises(ValueError):
        BoundingBox(south_west=GeoPoint(lat=0, lon=179), north_east=GeoPoint(lat=1, lon=-179))


def test_bbox_containment_boundary_inclusive():
    assert BBOX.contains(GeoPoint(lat=39.0, lon=-85.0))  # south-west corner
    assert BBOX.contains(GeoPoint(lat=40.0, lon=-84.0))  # north-east corner
    assert not BBOX.contains(GeoPoint(lat=40.0001, lon=-84.5))


def test_haversine_against_published_pair():
    # BNA (36.12, -86.67) to LAX (33.94, -118.40): 2886.44 km on a
    # mean-radius sphere (standard worked example for this formula).
    d = haversine_m(GeoPoint(lat=36.12, lon=-86.67), GeoPoint(lat=33.94, lon=-118.40))
    assert d == pytest.approx(2886444, rel=1e-3)


def test_geocircle_boundary_inclusive():
    center = GeoPoint(lat=39.5, lon=-84.5)
    circle = GeoCircle(center=center, radius_m=1000)
    assert circle.contains(center)
    with pytest.raises(ValueError):
        GeoCircle(center=center, radius_m=0)
    with pytest.raises(ValueError):
        GeoCircle(center=center, radius_m=2_000_000)


# --- category specs -----------------------------------------------------------

def test_validate_category_spec_consistent():
    report = validate_category_spec(CategorySpec(name="Angry rant", total=149, medium=64, low=85))
    assert report.ok and report.discrepancy == 0


def test_validate_category_spec_inconsistent():
    report = validate_category_spec(
        CategorySpec(name="Corroboration", total=213, medium=168, low=50)
    )
    assert not report.ok
    assert report.discrepancy == -5


def test_validate_category_spec_zero():
    report = validate_category_spec(CategorySpec(name="empty", total=0))
    assert report.ok and report.discrepancy == 0


def test_validate_category_spec_rejects_negative():
    with pytest.raises(ValueError):
        validate_category_spec(CategorySpec(name="bad", total=-1))


# --- microblog text contract ---------------------------------------------------

def test_validate_microblog_example_hashtag():
    text = "They just kicked some guy out of the ER for radiation poisoning #HulkingOut"
    assert validate_microblog(text) == ["#HulkingOut"]


def test_validate_microblog_empty_and_overlength():
    with pytest.raises(EmptyText):
        validate_microblog("")
    with pytest.raises(Overlength):
        validate_microblog("a" * 141)
    assert validate_microblog("a" * 140) == []


def test_hashtags_ordered_deduplicated():
    assert extract_hashtags("#b one #a two #b three #a") == ["#b", "#a"]


def test_microblog_derives_hashtags_and_checks_retweet_ref():
    msg = make_msg("warning #one and #two and #one")
    assert msg.hashtags == ("#one", "#two")
    with pytest.raises(ValueError):
        make_msg("rt", id=5, retweet_of=5)
    make_msg("rt", id=5, retweet_of=4)  # fine


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=1, max_size=140))
def test_hashtag_offsets_roundtrip(text):
    for tag, offset in hashtag_offsets(text):
        assert text[offset : offset + len(tag)] == tag
        assert tag.startswith("#")


# --- ingestion ------------------------------------------------------------------

def record(ts, user, text, lat=None, lon=None):
    d = {"ts": ts, "user": user, "text": text}
    if lat is not None:
        d["lat"] = lat
    if lon is not None:
        d["lon"] = lon
    return d


def test_ingest_keeps_boundary_point():
    result = ingest_background([record(0, "u", "hi", lat=39.0, lon=-85.0)], BBOX)
    assert len(result.messages) == 1


def test_ingest_drops_outside_box():
    result = ingest_background([record(0, "u", "hi", lat=40.5, lon=-84.5)], BBOX)
    assert result.messages == [] and result.rejected == []


def test_ingest_ungeotagged_flag():
    recs = [record(0, "u", "no geo here")]
    assert ingest_background(recs, BBOX).messages == []
    kept = ingest_background(recs, BBOX, keep_ungeotagged=True).messages
    assert len(kept) == 1 and kept[0].geo is None


def test_ingest_counts_synthetic_placement():
    # oracle: place exactly 640 of 1000 records inside the box, shuffle,
    # then count by direct comparison
    rng = random.Random(99)
    placements = [True] * 640 + [False] * 360
    rng.shuffle(placements)
    records = []
    for i, inside in enumerate(placements):
        if inside:
            lat = rng.uniform(39.0, 40.0)
        else:
            lat = rng.uniform(40.001, 41.0)
        records.append(record(i, f"u{i}", f"msg {i}", lat=lat, lon=rng.uniform(-85.0, -84.0)))
    result = ingest_background(records, BBOX)
    assert len(result.messages) == 640
    oracle = [r for r in records if BBOX.contains(GeoPoint(r["lat"], r["lon"]))]
    assert [m.text for m in result.messages] == [r["text"] for r in oracle]


def test_ingest_sets_visibility_low_and_source():
    result = ingest_background([record(5, "u", "hi", lat=39.5, lon=-84.5)], BBOX)
    msg = result.messages[0]
    assert msg.visibility == VisibilityLevel.LOW
    assert msg.source == SourceClass.BACKGROUND
    assert msg.scenario_time == 5.0


def test_ingest_rejects_malformed_records_with_line_numbers():
    lines = [
        json.dumps(record(0, "u", "ok", lat=39.5, lon=-84.5)),
        "{not json",
        json.dumps({"ts": 1, "user": "u"}),  # missing text
        json.dumps(record(2, "u", "a" * 141, lat=39.5, lon=-84.5)),  # overlength
        json.dumps(record(3, "u", "ok again", lat=39.5, lon=-84.5)),
        json.dumps(record(4, "u", "bad geo", lat=95.0, lon=-84.5)),
    ]
    result = ingest_background(lines, BBOX)
    assert [m.text for m in result.messages] == ["ok", "ok again"]
    assert sorted(r.line for r in result.rejected) == [2, 3, 4, 6]


def test_ingest_is_pure_filter_and_idempotent():
    rng = random.Random(4)
    records = [
        record(i, f"u{i}", f"m{i}", lat=rng.uniform(38.5, 40.5), lon=-84.5)
        for i in range(200)
    ]
    first = ingest_background(records, BBOX)
    texts = [m.text for m in first.messages]
    # order preserved, subset of input
    assert texts == [r["text"] for r in records if 39.0 <= r["lat"] <= 40.0]
    # refiltering its own output changes nothing
    again = ingest_background(
        [record(int(m.scenario_time), m.author, m.text, m.geo.lat, m.geo.lon) for m in first.messages],
        BBOX,
    )
    assert [m.text for m in again.messages] == texts


# --- author assignment -----------------------------------------------------------

def test_assign_author_single_pool():
    msg = make_msg()
    assert assign_author(msg, ["only"], random.Random(1)).author == "only"


def test_assign_author_empty_pool():
    with pytest.raises(ConfigurationError):
        assign_author(make_msg(), [], random.Random(1))


def test_assign_author_uniformity_4_sigma():
    # oracle: direct simulation; each count within 4 sigma of n*p
    pool = [f"h{i}" for i in range(100)]
    rng = random.Random(42)
    counts = {h: 0 for h in pool}
    msg = make_msg()
    n = 10_000
    for _ in range(n):
        counts[assign_author(msg, pool, rng).author] += 1
    p = 1 / len(pool)
    sigma = (n * p * (1 - p)) ** 0.5
    for handle, c in counts.items():
        assert abs(c - n * p) <= 4 * sigma, (handle, c)


def test_assign_author_deterministic_under_seed():
    pool = [f"h{i}" for i in range(50)]
    msg = make_msg()
    seq1 = [assign_author(msg, pool, random.Random(7)).author for _ in range(1)]
    runs = []
    for _ in range(2):
        rng = random.Random(123)
        runs.append([assign_author(msg, pool, rng).author for _ in range(500)])
    assert runs[0] == runs[1]
    assert seq1 == seq1


# --- accounts & manifest ----------------------------------------------------------

def test_account_handle_rules():
    Account(handle="a" * 32, kind=AccountKind.PIO, visibility=VisibilityLevel.HIGH)
    with pytest.raises(ValueError):
        Account(handle="", kind=AccountKind.PIO, visibility=VisibilityLevel.HIGH)
    with pytest.raises(ValueError):
        Account(handle="has space", kind=AccountKind.PIO, visibility=VisibilityLevel.HIGH)
    with pytest.raises(ValueError):
        Account(handle="a" * 33, kind=AccountKind.PIO, visibility=VisibilityLevel.HIGH)


def test_manifest_roundtrip_and_digest(tmp_path):
    manifest = CorpusManifest(
        categories=(CategorySpec(name="c1", total=2, high=1, medium=1),),
        username_pool=("a", "b"),
        bbox=BBOX,
    )
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest.to_dict()), encoding="utf-8")
    loaded = load_manifest(path)
    assert loaded == manifest
    assert manifest_digest(loaded) == manifest_digest(manifest)
    assert loaded.background_fraction_target == 0.76


def test_manifest_requires_pool():
    with pytest.raises(ConfigurationError):
        CorpusManifest(categories=(), username_pool=(), bbox=BBOX)
