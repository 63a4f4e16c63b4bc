from __future__ import annotations

import json
from pathlib import Path

import pytest

from safejoin import engine
from safejoin.jointree import ParseTree
from safejoin.schema import JoinSchema, parse_schema

DATA = Path(__file__).resolve().parent.parent / "data"


def load_schema(name: str) -> JoinSchema:
    return parse_schema((DATA / name).read_text())


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def ex1() -> JoinSchema:
    return load_schema("ex1.json")


@pytest.fixture
def ex1_db(ex1):
    return engine.database_from_json(ex1, json.loads((DATA / "ex1_db.json").read_text()))


@pytest.fixture
def fig3() -> JoinSchema:
    return load_schema("fig3.json")


@pytest.fixture
def fig3_tree(fig3) -> ParseTree:
    # ABCDE at the root, AB and AE hanging from ACBE
    return ParseTree.from_arcs(
        "ABCDE", fig3.names, [("ABCDE", "ACBE"), ("ABCDE", "ADE"), ("ACBE", "AB"), ("ACBE", "AE")]
    )


@pytest.fixture
def example2() -> JoinSchema:
    return load_schema("example2.json")


@pytest.fixture
def projection() -> JoinSchema:
    return load_schema("projection.json")
