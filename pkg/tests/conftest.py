"""Shared fixtures: the fixture tree, registry, and a running harness site."""

from __future__ import annotations

from pathlib import Path

import pytest

from consentkit.signal import SiteConfig, WebsiteSimulator
from consentkit.taxonomy import Registry, load_registry

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def registry() -> Registry:
    return load_registry(FIXTURES / "registry.json")


@pytest.fixture()
def site():
    simulator = WebsiteSimulator(SiteConfig.load(FIXTURES / "site_config.json"))
    simulator.start()
    yield simulator
    simulator.stop()


@pytest.fixture()
def special_site():
    config = SiteConfig.load(FIXTURES / "site_config.json")
    import json

    config.requests_doc = json.loads((FIXTURES / "consent_requests_special.json").read_text())
    simulator = WebsiteSimulator(config)
    simulator.start()
    yield simulator
    simulator.stop()
