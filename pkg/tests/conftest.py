import sys
from pathlib import Path

import pytest


ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = ROOT / "src"

if SRC_DIR.exists():
    sys.path.insert(0, str(SRC_DIR))

from tests.factories import make_batch, make_tiny_agent  # noqa: E402


@pytest.fixture
def tiny_agent():
    return make_tiny_agent()


@pytest.fixture
def batch():
    return make_batch()
