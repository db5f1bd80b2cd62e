"""Shared shim-test fixtures built on the pipeline package's mock contract."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from claimedit.clients import FixtureSet
from modelshim.app import create_app
from modelshim.config import ShimConfig

SEARCH_RECORDS = tuple(
    {
        "query_substring": f"area{i:02d}",
        "pages": [
            {
                "url": f"https://example.org/area{i:02d}/p{v}",
                "title": f"area{i:02d} page {v}",
                "text": f"Survey {v} describes area{i:02d} at length. The area{i:02d} ledger entry {v} agrees.",
            }
            for v in range(3)
        ],
    }
    for i in range(4)
)
EDIT_RECORDS = (("area01", "The area01 ledger entry 0 agrees."),)


@pytest.fixture
def fixture_set() -> FixtureSet:
    return FixtureSet(search_records=SEARCH_RECORDS, edit_records=EDIT_RECORDS)


def write_fixture_file(path: Path, fixture: FixtureSet) -> Path:
    lines = [json.dumps(r, ensure_ascii=False) for r in fixture.search_records]
    lines += [
        json.dumps({"claim_substring": sub, "revision": rev}, ensure_ascii=False)
        for sub, rev in fixture.edit_records
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def fixture_path(tmp_path, fixture_set) -> Path:
    return write_fixture_file(tmp_path / "fixtures.jsonl", fixture_set)


@pytest.fixture
def client(fixture_path) -> TestClient:
    app = create_app(ShimConfig(mode="fixtures", fixture_path=str(fixture_path)))
    return TestClient(app)
