from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flowercase import CaseStore, SigningKey


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("FLOWER_SEED", raising=False)
    monkeypatch.delenv("FLOWER_HOME", raising=False)
    monkeypatch.delenv("FLOWER_CASE", raising=False)


@pytest.fixture
def store(tmp_path) -> CaseStore:
    return CaseStore(tmp_path / "cases", durable=False)


@pytest.fixture
def key() -> SigningKey:
    return SigningKey.generate(key_id="analyst1")


@pytest.fixture
def engine(store):
    return store.create_case("op-ruag", opened_at="2019-02-01T08:00:00Z", actor="analyst1")


T = [f"2019-02-0{i}T0{i}:00:00Z" for i in range(1, 10)]  # t1..t9 shorthand


@pytest.fixture
def times():
    return T
