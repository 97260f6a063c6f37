"""Shared fixtures: generated exercise corpora and compiled plans."""
from __future__ import annotations

import pytest

from drillstream.fixtures import DESK, PAPER_SCALE, write_fixture
from drillstream.model import load_background, load_manifest
from drillstream.scheduling import VolumePolicy, compile_plan, load_msel
from drillstream.templates import load_templates


class FixtureBundle:
    def __init__(self, paths):
        self.paths = paths
        self.manifest = load_manifest(paths["manifest"])
        self.templates = load_templates(paths["templates"])
        self.msel = load_msel(paths["msel"])
        self.background = load_background(paths["background"], self.manifest.bbox).messages

    def compile(self, seed: int, **kwargs):
        return compile_plan(
            self.manifest,
            self.templates,
            self.msel,
            self.background,
            VolumePolicy(),
            seed,
            **kwargs,
        )


@pytest.fixture(scope="session")
def desk_fixture(tmp_path_factory) -> FixtureBundle:
    out = tmp_path_factory.mktemp("fixture_desk")
    return FixtureBundle(write_fixture(out, DESK, seed=7))


@pytest.fixture(scope="session")
def paper_fixture(tmp_path_factory) -> FixtureBundle:
    out = tmp_path_factory.mktemp("fixture_paper")
    return FixtureBundle(write_fixture(out, PAPER_SCALE, seed=7))


@pytest.fixture(scope="session")
def desk_plan(desk_fixture):
    """Desk fixture compiled at seed 7: (plan, report)."""
    return desk_fixture.compile(7)
