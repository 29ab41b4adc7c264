from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from situcbr.casebase import load as load_casebase
from situcbr.recommender import Engine
from situcbr.situation import ContextMaps, load_contacts, load_places, load_time_rules
from situcbr.taxonomy import Taxonomies, load_taxonomy

DATA = Path(str(resources.files("situcbr") / "data"))

# criterion number -> list of (label, passed)
ACCEPTANCE_RESULTS: dict[int, list[tuple[str, bool]]] = {}


def _read(rel: str) -> str:
    return (DATA / rel).read_text(encoding="utf-8")


def parent_map(taxonomy_rel: str) -> dict:
    return {n["id"]: n["parent"] for n in json.loads(_read(taxonomy_rel))["nodes"]}


@pytest.fixture(scope="session")
def taxonomies() -> Taxonomies:
    return Taxonomies(
        location=load_taxonomy(_read("ontologies/location.json")),
        time=load_taxonomy(_read("ontologies/time.json")),
        social=load_taxonomy(_read("ontologies/social.json")),
    )


@pytest.fixture(scope="session")
def fixture_parent_maps():
    return tuple(parent_map(f"ontologies/{d}.json") for d in ("location", "time", "social"))


@pytest.fixture(scope="session")
def maps(taxonomies) -> ContextMaps:
    return ContextMaps(
        places=load_places(_read("mappings/places.csv"), taxonomies.location),
        rules=load_time_rules(_read("mappings/time_rules.json"), taxonomies.time),
        contacts=load_contacts(_read("mappings/contacts.csv"), taxonomies.social),
    )


@pytest.fixture(scope="session")
def seed_doc() -> str:
    return _read("casebase.json")


@pytest.fixture
def seed_cases(taxonomies, seed_doc):
    """The three-case base of the bundled demonstration project, freshly loaded per test."""
    return load_casebase(seed_doc, taxonomies)


@pytest.fixture
def engine(taxonomies, maps, seed_cases) -> Engine:
    return Engine(taxonomies, maps, seed_cases)


@pytest.fixture
def paul_scenario() -> list[str]:
    return _read("scenarios/paul.jsonl").splitlines()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        checks = ACCEPTANCE_RESULTS[number]
        ok = all(passed for _, passed in checks)
        if len(checks) == 1:
            detail = checks[0][0]
        else:
            detail = ", ".join(f"{label} {'ok' if passed else 'FAIL'}" for label, passed in checks)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
