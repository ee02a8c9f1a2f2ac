from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reflexbridge.entities import Engine
from reflexbridge.fixtures import fresh_engine

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def engine() -> Engine:
    return fresh_engine()


@pytest.fixture
def bare_engine() -> Engine:
    return Engine()


def golden_path(name: str) -> Path:
    return GOLDEN / name
